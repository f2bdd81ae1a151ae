#include <math.h>
#include <stdio.h>
#include <string.h>

#include "filtsens.h"

static const char *DOC =
    "{\"domain\": \"dt\","
    " \"gx\": {\"gain\": 1, \"zeros\": [[0.5, 0]], \"poles\": [[0.2, 0]]},"
    " \"gy\": {\"gain\": 1, \"poles\": [[0.3, 0]]},"
    " \"f\": {\"gain\": 0.5, \"poles\": [[0.1, 0]]}}";

int main(void) {
    FsensSystem *sys = NULL;
    if (fsens_system_from_json(DOC, &sys) != FSENS_STATUS_OK) {
        fprintf(stderr, "load: %s\n", fsens_last_error());
        return 1;
    }
    FsensIntegral p, m;
    if (fsens_p_integral(sys, &p) != FSENS_STATUS_OK || fsens_m_integral(sys, &m) != FSENS_STATUS_OK) {
        fprintf(stderr, "integral: %s\n", fsens_last_error());
        return 1;
    }
    FsensQuadrature q;
    if (fsens_m_quadrature(sys, 1e-8, &q) != FSENS_STATUS_OK || fabs(q.value - m.value) > 1e-6) {
        fprintf(stderr, "quadrature %g vs %g\n", q.value, m.value);
        return 1;
    }
    if (fsens_p_integral(NULL, &p) != FSENS_STATUS_NULL_ARGUMENT || fsens_last_error() == NULL) {
        return 1;
    }
    char *report = NULL;
    if (fsens_analyze_json(DOC, false, &report) != FSENS_STATUS_OK || strstr(report, "DT_M") == NULL) {
        return 1;
    }
    fsens_string_free(report);
    fsens_system_free(sys);
    printf("version %s P %.6f M %.6f bits\n", fsens_version(), p.value, m.value);
    return 0;
}
