#include <stdio.h>
#include "polewarp.h"

int main(void) {
    PwScenario *s = NULL;
    PwVerdict *v = NULL;
    PwStability status;
    double tau;
    if (pw_scenario_builtin("lorenz_stable", &s) != PW_STATUS_OK) return 1;
    if (pw_assess(s, &v) != PW_STATUS_OK) return 2;
    if (pw_verdict_status(v, &status) != PW_STATUS_OK || status != PW_STABILITY_STABLE) return 3;
    if (pw_verdict_tau_pole(v, &tau) != PW_STATUS_OK) return 4;
    printf("%.6f\n", tau);
    pw_verdict_free(v);
    pw_scenario_free(s);
    if (pw_scenario_builtin("missing", &s) != PW_STATUS_CONFIG) return 5;
    return pw_last_error() == NULL ? 6 : 0;
}
