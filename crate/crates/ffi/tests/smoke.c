#include <math.h>
#include <stdio.h>
#include "ruinwalk.h"

int main(void) {
    const double claim[] = {0.5, 0.5};
    const double inter[] = {0.5, 0.0, 0.5};
    RwModel *model = NULL;
    if (rw_model_from_pmfs(0, claim, 2, 0, inter, 3, &model) != RW_STATUS_OK) return 1;
    RwSolution *sol = NULL;
    if (rw_solve(model, 3, &sol) != RW_STATUS_OK) return 2;
    double phi1 = 0.0;
    if (rw_solution_phi(sol, 1, &phi1) != RW_STATUS_OK) return 3;
    if (fabs(phi1 - (2.0 - sqrt(2.0))) > 1e-12) return 4;
    if (rw_solution_phi(sol, 9, &phi1) != RW_STATUS_OUT_OF_RANGE) return 5;
    if (rw_last_error() == NULL) return 6;
    printf("phi(1) = %.15f\n", phi1);
    rw_solution_free(sol);
    rw_model_free(model);
    return 0;
}
