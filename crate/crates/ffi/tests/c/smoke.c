#include <stdio.h>
#include <string.h>
#include "cordspec.h"

int main(void) {
    CsGroup *g = NULL;
    if (cs_group_figure_eight(&g) != CS_STATUS_OK) return 10;
    CsSpectrum *s = NULL;
    if (cs_spectrum_enumerate(g, 2.0, 3.0, &s) != CS_STATUS_OK) return 11;
    size_t n = 0;
    cs_spectrum_len(s, &n);
    char word[64];
    size_t need = 0;
    if (cs_spectrum_class_word(s, 0, word, sizeof word, &need) != CS_STATUS_OK) return 12;
    double len = 0.0;
    cs_spectrum_length(s, 0, &len);
    if (cs_spectrum_length(s, n, &len) != CS_STATUS_INVALID_ARGUMENT) return 13;
    char msg[256];
    cs_last_error(msg, sizeof msg, NULL);
    printf("%zu %s %.12f\n", n, word, len);
    cs_spectrum_free(s);
    cs_group_free(g);
    return strlen(msg) > 0 ? 0 : 14;
}
