#include <math.h>
#include <stdio.h>

#include "respoly.h"

int main(void) {
    const double iv[] = {-2.0, -1.0, 1.0, 2.0};
    RpProblem *p = NULL;
    RpSolution *s = NULL;
    double r = 0.0, w = 0.0;
    size_t d = 0;

    if (rp_problem_new(iv, 2, 0.0, &p) != RP_STATUS_OK) return 1;
    if (rp_solve(p, 2, &s) != RP_STATUS_OK) return 2;
    if (rp_solution_norm(s, &r) != RP_STATUS_OK || fabs(r - 0.6) > 1e-12) return 3;
    if (rp_solution_degree(s, &d) != RP_STATUS_OK || d != 2) return 4;
    if (rp_solution_widom(s, &w) != RP_STATUS_OK || fabs(w - 2.0) > 1e-10) return 5;
    rp_solution_free(s);

    RpProblem *bad = NULL;
    if (rp_problem_new(iv, 2, 1.5, &bad) != RP_STATUS_INVALID_INPUT || bad) return 6;
    if (!rp_last_error()) return 7;
    rp_problem_free(p);
    printf("ok %s r=%.17g\n", rp_version(), r);
    return 0;
}
