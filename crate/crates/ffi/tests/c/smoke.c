#include <math.h>
#include <stdio.h>

#include "gwforest.h"

#define CHECK(call)                                                    \
  do {                                                                 \
    GwStatus s_ = (call);                                              \
    if (s_ != GW_STATUS_OK) {                                          \
      fprintf(stderr, "%s -> %d: %s\n", #call, s_, gw_last_error());   \
      return 1;                                                        \
    }                                                                  \
  } while (0)

int main(void) {
  const double affinity[9] = {0, 5, 3, 5, 0, 8, 3, 8, 0};
  GwMatrix *p = NULL;
  CHECK(gw_matrix_from_affinity(3, affinity, &p));

  double pi[3];
  CHECK(gw_chain_stationary(p, pi, 3));
  if (fabs(pi[1] - 13.0 / 32.0) > 1e-12) return 2;

  GwCriterion c = gw_criterion_default();
  GwReport *r = NULL;
  CHECK(gw_run_diffusion(p, &c, &r));
  if (gw_report_mode(r) != GW_MODE_FIXED_POINT) return 3;
  printf("diffusion: %zu iterations\n", gw_report_iterations(r));

  GwMatrix *bad = NULL;
  const double ragged[4] = {0.5, 0.6, 0.5, 0.5};
  CHECK(gw_matrix_new(2, ragged, &bad));
  GwReport *r2 = NULL;
  if (gw_run_diffusion(bad, &c, &r2) != GW_STATUS_NOT_STOCHASTIC) return 4;
  if (gw_last_error() == NULL) return 5;

  gw_report_free(r);
  gw_matrix_free(bad);
  gw_matrix_free(p);
  return 0;
}
