/* Absorbing/absorbing Riemann-Liouville run from the tent profile.
 *
 *   cargo build --release -p fracdiff-ffi
 *   cc crates/ffi/examples/solve.c -Icrates/ffi/include \
 *      target/release/libfracdiff_ffi.a -lm -lpthread -ldl -o solve
 */
#include <stdio.h>
#include <stdlib.h>

#include "fracdiff.h"

static int check(FdStatus status, const char *what) {
    if (status != FD_STATUS_OK) {
        fprintf(stderr, "%s failed (%d): %s\n", what, (int)status, fd_last_error());
        return 1;
    }
    return 0;
}

int main(void) {
    const double times[] = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    const size_t count = sizeof times / sizeof times[0];
    FdSolveOptions opts = {
        .scheme = {.form = FD_FORM_RIEMANN_LIOUVILLE,
                   .left = FD_BOUNDARY_ABSORBING,
                   .right = FD_BOUNDARY_ABSORBING,
                   .alpha = 1.5,
                   .c = 1.0,
                   .n = 200},
        .dt = 1e-3,
        .t_end = 0.5,
        .method = FD_METHOD_IMPLICIT,
        .initial = FD_INITIAL_TENT,
        .snapshot_times = times,
        .snapshot_count = count,
    };

    FdSeries *series = NULL;
    if (check(fd_solve(&opts, &series), "fd_solve")) return 1;

    double mass[6], absorbed[6], rate;
    if (check(fd_series_mass_trace(series, mass, count), "mass") ||
        check(fd_series_absorbed(series, absorbed, count), "absorbed") ||
        check(fd_series_decay_rate(series, &rate), "decay rate")) {
        fd_series_free(series);
        return 1;
    }
    for (size_t k = 0; k < count; ++k)
        printf("t=%.1f mass=%.6f absorbed=%.6f\n", times[k], mass[k], absorbed[k]);
    printf("decay rate %.4f\n", rate);

    FdScheme bad = opts.scheme;
    bad.form = FD_FORM_CAPUTO;
    bad.left = FD_BOUNDARY_REFLECTING;
    FdMatrix *m = NULL;
    FdStatus st = fd_matrix_new(&bad, &m);
    printf("caputo/reflecting -> status %d: %s\n", (int)st, fd_last_error());

    fd_series_free(series);
    return st == FD_STATUS_UNSUPPORTED ? 0 : 1;
}
