#include <stdio.h>
#include <stdlib.h>
#include "tsc.h"

/* Two orthogonal lines in R^4, three points each, plus nothing else. */
int main(void) {
    const double pts[] = {
        1.0, 0.1, 0.0, 0.0,
        2.0, -0.2, 0.0, 0.0,
        0.5, 0.05, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.3,
        0.0, 0.0, -2.0, -0.5,
        0.0, 0.0, 0.7, 0.2,
    };
    TscDataset *data = NULL;
    if (tsc_dataset_new(pts, 6, 4, &data) != TSC_STATUS_OK) return 1;

    TscClusterOptions opts = tsc_cluster_options_default();
    opts.l_hat = 2;
    TscClusterResult *res = NULL;
    if (tsc_cluster(data, 2, &opts, &res) != TSC_STATUS_OK) return 2;

    int32_t labels[6];
    if (tsc_cluster_result_labels(res, labels, 6) != TSC_STATUS_OK) return 3;
    if (labels[0] != labels[1] || labels[1] != labels[2]) return 4;
    if (labels[3] != labels[4] || labels[4] != labels[5]) return 5;
    if (labels[0] == labels[3]) return 6;

    TscClusterResult *bad = NULL;
    if (tsc_cluster(data, 6, NULL, &bad) != TSC_STATUS_INVALID_Q) return 7;
    if (tsc_last_error_message() == NULL) return 8;

    tsc_cluster_result_free(res);
    tsc_dataset_free(data);
    printf("ok\n");
    return 0;
}
