#include <stdio.h>
#include <string.h>
#include "ecomplex.h"

#define CHECK(call) do { EcxStatus s_ = (call); if (s_ != ECX_STATUS_OK) { \
    char msg[256]; ecx_last_error_message(msg, sizeof msg); \
    fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, msg); return 1; } } while (0)

int main(void) {
    size_t cs[] = {0, 0, 0, 1, 1, 2};
    size_t ps[] = {0, 1, 2, 0, 1, 0};
    EcxMatrix *m = NULL;
    CHECK(ecx_matrix_from_edges(3, 3, cs, ps, 6, &m));

    size_t div[3];
    CHECK(ecx_matrix_diversification(m, div, 3));

    EcxTrajectory *t = NULL;
    if (ecx_reflect(m, -1, &t) != ECX_STATUS_INVALID_ARGUMENT) return 2;
    CHECK(ecx_reflect(m, 4, &t));
    double k1[3];
    CHECK(ecx_trajectory_country_level(t, 1, k1, 3));
    double rw = 1.0;
    CHECK(ecx_random_walk_check(m, t, 4, &rw));

    printf("%s %zu %zu %zu %.6f %.6f %.6f %d\n", ecx_version(), div[0], div[1], div[2],
           k1[0], k1[1], k1[2], rw < 1e-12);
    ecx_trajectory_free(t);
    ecx_matrix_free(m);
    return 0;
}
