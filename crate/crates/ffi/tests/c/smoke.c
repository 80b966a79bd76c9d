#include <math.h>
#include <stdio.h>
#include "distill_lab.h"

static int fails = 0;
#define EXPECT(c) do { if (!(c)) { fprintf(stderr, "failed: %s (line %d)\n", #c, __LINE__); fails++; } } while (0)

int main(void) {
    double b = 0.0;
    EXPECT(dl_beta_bound(2, 1e-14, &b) == DL_STATUS_OK);
    EXPECT(fabs(b + 0.25) < 1e-12);
    EXPECT(dl_beta_bound(0, 1e-14, &b) == DL_STATUS_ARGUMENT);
    EXPECT(dl_last_error() != NULL);

    DlMatrix *w = NULL;
    EXPECT(dl_werner_partial_transpose(2, -0.6, &w) == DL_STATUS_OK);
    EXPECT(dl_matrix_rows(w) == 4 && dl_matrix_cols(w) == 4);
    double lo = 0.0;
    EXPECT(dl_min_eigenvalue(w, &lo) == DL_STATUS_OK);
    EXPECT(lo < 0.0);
    dl_matrix_free(w);

    DlReport *r = NULL;
    EXPECT(dl_minimize_q(2, 2, -0.6, 3, 7, &r) == DL_STATUS_OK);
    double v = 0.0;
    EXPECT(dl_report_best_value(r, &v) == DL_STATUS_OK);
    EXPECT(v < 0.0);
    char *json = NULL;
    EXPECT(dl_report_to_json(r, &json) == DL_STATUS_OK);
    EXPECT(json != NULL && json[0] == '{');
    dl_string_free(json);
    dl_report_free(r);

    EXPECT(dl_q_functional(NULL, 0.0, &v) == DL_STATUS_NULL_POINTER);
    if (fails == 0) printf("ok\n");
    return fails;
}
