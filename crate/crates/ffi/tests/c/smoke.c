#include <stdio.h>
#include <string.h>
#include "dense_cycle.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "failed: %s (%s)\n", #cond, dc_last_error()); return 1; } } while (0)

int main(void) {
    DcParams *params = NULL;
    DcAdjacency *a = NULL, *x = NULL;
    double z[20];
    double llr = 0.0;
    DcDetection det;

    CHECK(dc_params_new(20, 0.7, 0.8, 0.2, &params) == DC_STATUS_INVALID_PARAMS);
    CHECK(strlen(dc_last_error()) > 0);
    CHECK(dc_params_new(20, 0.25, 0.8, 0.2, &params) == DC_STATUS_OK);
    CHECK(dc_sample_planted(params, 1, 0, &a, &x, z) == DC_STATUS_OK);
    CHECK(dc_adjacency_n(a) == 20);
    CHECK(dc_log_likelihood_ratio(a, x, params, &llr) == DC_STATUS_OK);
    CHECK(dc_detect(a, params, 2, 0, &det) == DC_STATUS_OK);
    CHECK(dc_region_label(0.9, 0.1) == 'A');
    printf("llr=%f l_hat=%f edges=%zu\n", llr, det.l_hat, dc_adjacency_edge_count(x));
    dc_adjacency_free(a);
    dc_adjacency_free(x);
    dc_params_free(params);
    return 0;
}
