#include <stdio.h>
#include <string.h>
#include "majsearch.h"

int main(void) {
    uint32_t v = 0;
    bool impossible = true;
    if (ms_exact(3, 3, "majority", 0, 1000000, &v, &impossible) != MS_STATUS_OK || v != 1 || impossible) {
        fprintf(stderr, "exact failed: %s\n", ms_last_error());
        return 1;
    }
    MsDesign *d = NULL;
    if (ms_design_build("thm3ii", 9, 3, 0, &d) != MS_STATUS_OK) {
        fprintf(stderr, "build failed: %s\n", ms_last_error());
        return 1;
    }
    size_t size = 0, delta = 0, delta2 = 0;
    ms_design_stats(d, &size, &delta, &delta2);
    ms_design_free(d);
    if (delta2 != 5) {
        fprintf(stderr, "delta2 %zu\n", delta2);
        return 1;
    }
    if (ms_design_build("nope", 9, 3, 0, &d) != MS_STATUS_USAGE || strlen(ms_last_error()) == 0) {
        return 1;
    }
    uint8_t colors[5] = {1, 0, 1, 0, 1};
    MsRun *r = NULL;
    if (ms_run("a3", colors, 5, 3, 1, &r) != MS_STATUS_OK || colors[ms_run_ball(r)] != 1) {
        return 1;
    }
    ms_run_free(r);
    printf("ok %s\n", ms_version());
    return 0;
}
