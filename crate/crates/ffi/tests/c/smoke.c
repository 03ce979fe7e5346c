#include <stdio.h>
#include "delaunay_glue.h"

int main(void) {
    DgNeckParams p;
    if (dg_neck_params(0.2, &p) != DG_STATUS_OK) {
        char msg[256];
        dg_last_error_message(msg, sizeof msg);
        fprintf(stderr, "%s\n", msg);
        return 1;
    }
    DgProfile *prof = NULL;
    if (dg_profile_new(0.2, 2.0, 0.0, &prof) != DG_STATUS_OK) return 1;
    DgProfileSample first;
    dg_profile_sample(prof, 0, &first);
    printf("tau = %.9f, points = %zu, rho(-2) = %.9f\n", p.tau, dg_profile_len(prof), first.rho);
    dg_profile_free(prof);
    double gamma;
    dg_floquet_exponent(1.0, 2, &gamma);
    printf("gamma = %.9f\n", gamma);
    return 0;
}
