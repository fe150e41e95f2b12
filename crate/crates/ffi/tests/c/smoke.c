#include <math.h>
#include <stdio.h>
#include <string.h>

#include "ncpt.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "failed: %s (%s)\n", #cond, ncpt_last_error()); \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    NcptSystem *sys = NULL;
    CHECK(ncpt_system_from_preset("gd154", &sys) == NCPT_OK);
    NcptWidths w;
    CHECK(ncpt_system_widths(sys, &w) == NCPT_OK);
    CHECK(w.gamma3_ev > 0.2 && w.gamma3_ev < 0.4);

    NcptContext *ctx = NULL;
    CHECK(ncpt_context_new(sys, NCPT_LASER_XFELO, NCPT_GEOMETRY_COPROPAGATING, 0.9, &ctx) == NCPT_OK);
    ncpt_system_free(sys);

    NcptPlan plan;
    CHECK(ncpt_context_plan(ctx, &plan) == NCPT_OK);
    CHECK(fabs(plan.gamma - 24.8) < 0.1);

    NcptOutcome o;
    CHECK(ncpt_optimize_delay(ctx, 1e19, &o) == NCPT_OK);
    CHECK(o.eta > 0.95 && o.delay_s > 0.0);

    CHECK(ncpt_context_new(NULL, 0, 0, 1.0, &ctx) == NCPT_ERR_NULL_POINTER);
    CHECK(ncpt_system_from_preset("nope", &sys) == NCPT_ERR_INVALID_ARGUMENT);
    CHECK(sys == NULL);
    CHECK(strstr(ncpt_last_error(), "nope") != NULL);

    ncpt_context_free(ctx);
    printf("ok %s\n", ncpt_version());
    return 0;
}
