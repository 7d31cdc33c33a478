#include <stdio.h>
#include "risradar.h"

int main(void) {
    size_t count = 0;
    if (rr_hypothesis_count(4, 2, &count) != RR_STATUS_OK) return 1;

    RrLayout layout;
    rr_layout_default(&layout);
    layout.ris_rows = 2;
    layout.ris_cols = 2;
    layout.antenna_rows = 1;
    layout.antenna_cols = 1;
    RrGeometry *geom = NULL;
    if (rr_geometry_new(&layout, &geom) != RR_STATUS_OK) return 1;
    double gain = 0.0, phases[4];
    RrStatus s = rr_max_power_gain(geom, 0.5236, 0.7854, &gain, phases, 4);
    rr_geometry_free(geom);
    if (s != RR_STATUS_OK) {
        char msg[256];
        rr_last_error_message(msg, sizeof msg);
        fprintf(stderr, "error: %s\n", msg);
        return 1;
    }
    printf("risradar %s: %zu hypotheses, max gain %.6f\n", rr_version(), count, gain);
    return 0;
}
