#include <math.h>
#include <stdio.h>
#include "wam.h"

int main(void) {
    double h = 0.0;
    if (wam_min_horizon(30.0 / 3.6, 0.8, &h) != WAM_STATUS_OK || fabs(h - 1.06) > 0.01) {
        return 1;
    }
    WamState s = {0.0, 0.0, 2.0, 1.0, 0.0};
    WamPrediction p;
    if (wam_constant_velocity_predict(&s, 12, 0.4, &p) != WAM_STATUS_OK || fabs(p.x - 9.6) > 1e-12) {
        return 2;
    }
    WamDatabase *db = NULL;
    if (wam_database_load("/nonexistent/db.txt", &db) != WAM_STATUS_IO || db != NULL) {
        return 3;
    }
    if (wam_last_error_message() == NULL) {
        return 4;
    }
    printf("ok %s\n", wam_version());
    return 0;
}
