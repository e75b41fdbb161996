#include <stdio.h>
#include <string.h>
#include "germlab.h"

int main(void) {
    const char *germ_json =
        "{\"n\": 1, \"rotations\": [{\"preset\": \"golden\"}],"
        " \"f\": [{\"j\": 0, \"alpha\": [2], \"re\": 1, \"im\": 0}]}";
    GermlabGerm *germ = NULL;
    if (germlab_germ_from_json(germ_json, 128, &germ) != GERMLAB_STATUS_OK) return 1;

    GermlabSeries *h = NULL;
    double min_div = 0.0;
    if (germlab_linearize(germ, 6, false, &h, &min_div) != GERMLAB_STATUS_OK) return 2;
    if (germlab_series_order(h) != 6 || min_div <= 0.0) return 3;

    uint64_t k = 0;
    if (germlab_lemma_horizon(0.1, 1.0, 1.0, 1.0, &k) != GERMLAB_STATUS_OK || k != 14) return 4;

    GermlabStatus st = germlab_germ_from_json("[", 0, &germ);
    if (st != GERMLAB_STATUS_PARSE || strcmp(germlab_status_name(st), "parse") != 0) return 5;
    char *msg = germlab_last_error();
    if (msg == NULL) return 6;
    germlab_string_free(msg);

    germlab_series_free(h);
    germlab_germ_free(germ);
    printf("ok %s\n", germlab_version());
    return 0;
}
