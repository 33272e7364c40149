#include <math.h>
#include <stdio.h>
#include <string.h>

#include "aquannr.h"

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond,          \
              aq_last_error());                                       \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  AqNnrPredictor *p = NULL;
  CHECK(aq_nnr_new(3, 3, &p) == AQ_STATUS_OK);
  double pred = 0.0;
  CHECK(aq_nnr_predict(p, &pred) == AQ_STATUS_INSUFFICIENT_DATA);
  CHECK(strlen(aq_last_error()) > 0);
  for (int i = 0; i < 200; i++) {
    CHECK(aq_nnr_push(p, (double)i, (double)(i % 10)) == AQ_STATUS_OK);
  }
  CHECK(aq_nnr_predict(p, &pred) == AQ_STATUS_OK);
  CHECK(fabs(pred - 0.0) < 1e-12);
  CHECK(aq_nnr_push(p, 5.0, 1.0) == AQ_STATUS_INVALID_ARGUMENT);
  aq_nnr_free(p);

  AqRunningStats *s = NULL;
  CHECK(aq_stats_new(&s) == AQ_STATUS_OK);
  CHECK(aq_stats_update(s, 1.0) == AQ_STATUS_OK);
  CHECK(aq_stats_update(s, 3.0) == AQ_STATUS_OK);
  double mean = 0.0, var = 0.0;
  CHECK(aq_stats_mean(s, &mean) == AQ_STATUS_OK && mean == 2.0);
  CHECK(aq_stats_variance(s, &var) == AQ_STATUS_OK && var == 2.0);
  aq_stats_free(s);

  AqChannelParams ch;
  CHECK(aq_channel_default(&ch) == AQ_STATUS_OK);
  double snr = 0.0, psr = 0.0;
  CHECK(aq_snr_db(&ch, 100.0, &snr) == AQ_STATUS_OK);
  CHECK(aq_packet_success_prob(0.0, 8, &psr) == AQ_STATUS_OK);
  CHECK(fabs(psr - 1.0 / 256.0) < 1e-12);

  AqSimMetrics m;
  CHECK(aq_sim_run("node_count = 10\nduration_s = 100\n", &m) == AQ_STATUS_OK);
  CHECK(m.packets_sent == 10);
  CHECK(aq_sim_run("bogus = 1\n", &m) == AQ_STATUS_CONFIG);
  printf("ok %s\n", aq_version());
  return 0;
}
