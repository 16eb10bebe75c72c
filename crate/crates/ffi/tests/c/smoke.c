#include <math.h>
#include <stdio.h>
#include <string.h>

#include "basicgap.h"

static double sphere_drift(void *user, double x) {
    double m = *(double *)user;
    return m * cos(x) / sin(x);
}

int main(void) {
    double v = 0.0;
    if (bg_zhong_yang(3, 0.0, M_PI, &v) != BG_STATUS_OK || fabs(v - 1.0) > 1e-14) return 1;

    BgOptimalS o;
    if (bg_optimal_s(3, 1.0, M_PI / 2, &o) != BG_STATUS_OK || fabs(o.bound - 5.0625) > 1e-12) return 2;

    if (bg_zhong_yang(3, 1.0, 4.0, &v) != BG_STATUS_DOMAIN_ERROR) return 3;
    char msg[256];
    if (bg_last_error_message(msg, sizeof msg) == 0 || strstr(msg, "Bonnet") == NULL) return 4;

    double m = 2.0;
    BgSpectrum *s = NULL;
    if (bg_spectrum_shooting(0.0, M_PI, sphere_drift, NULL, &m, m, m, 2, 1e-10, &s) != BG_STATUS_OK) return 5;
    if (bg_spectrum_count(s) != 2) return 6;
    if (bg_spectrum_eigenvalue(s, 1, &v) != BG_STATUS_OK || fabs(v - 3.0) > 1e-7) return 7;
    bg_spectrum_free(s);

    BgExample *e = NULL;
    if (bg_zoo_isoparametric(2, 3, 1, 1, &e) != BG_STATUS_OK) return 8;
    double known = 0.0;
    if (bg_zoo_data(e, NULL, NULL, &known, NULL) != BG_STATUS_OK || known != 8.0) return 9;
    if (bg_zoo_reduction_eigenvalue(e, 1e-10, &v) != BG_STATUS_OK || fabs(v - 8.0) > 1e-6) return 10;
    bg_zoo_free(e);

    printf("ok %s\n", bg_version());
    return 0;
}
