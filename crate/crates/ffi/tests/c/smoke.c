#include <math.h>
#include <stdio.h>
#include <string.h>
#include "inf_rcs.h"

#define CHECK(cond)                                                     \
  do {                                                                  \
    if (!(cond)) {                                                      \
      fprintf(stderr, "check failed at line %d: %s\n", __LINE__, #cond); \
      return 1;                                                         \
    }                                                                   \
  } while (0)

int main(void) {
  RcsSampler *s = NULL;
  RcsSamplerOptions opts = rcs_sampler_options_default();
  CHECK(rcs_sampler_new_standard("small_uav", &opts, 7, &s) == RCS_STATUS_OK);
  double rcs[64];
  double b2[64];
  CHECK(rcs_sampler_fill(s, 0.0, 0.0, rcs, b2, 64) == RCS_STATUS_OK);
  for (int i = 0; i < 64; i++) {
    CHECK(rcs[i] > 0.0);
    CHECK(fabs(rcs[i] - pow(10.0, -1.281) * b2[i]) < 1e-12 * rcs[i]);
  }
  rcs_sampler_free(s);

  CHECK(rcs_sampler_new_standard("agv", NULL, 7, &s) == RCS_STATUS_VALIDATION);
  CHECK(strstr(rcs_last_error(), "agv") != NULL);

  double a = 0.0;
  CHECK(rcs_a_dbsm(-3.79, 0.61, &a) == RCS_STATUS_OK);
  CHECK(fabs(a - (-15.6518)) < 1e-3);
  double b = 0.0;
  CHECK(rcs_b2_db(0.0, &b) == RCS_STATUS_DEGENERATE);
  CHECK(rcs_b2_db(1.4, NULL) == RCS_STATUS_NULL_POINTER);

  double f[4] = {25, 26, 27, 28};
  double mu[4] = {-3.9, -3.8, -3.83, -3.79};
  double sg[4] = {1.4, 0.52, 1.74, 0.61};
  RcsTripleC t;
  CHECK(rcs_consolidate(f, mu, sg, 4, 3.0, &t) == RCS_STATUS_OK);
  CHECK(fabs(t.a_dbsm - (-13.57)) < 0.05);
  CHECK(fabs(t.b2_db - 3.065) < 0.05);
  puts("ok");
  return 0;
}
