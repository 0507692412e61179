#include <stdio.h>
#include <string.h>
#include "qbs.h"

int main(void) {
    QbsCircuit *c = NULL;
    if (qbs_circuit_new(12, &c) != QBS_STATUS_OK) return 10;
    size_t controls[4] = {0, 1, 2, 3};
    for (size_t q = 0; q < 5; q++) {
        if (qbs_circuit_append(c, QBS_GATE_KIND_X, NULL, 0, q) != QBS_STATUS_OK) return 11;
    }
    QbsCircuit *counter = NULL;
    if (qbs_build_counter(8, 4, &counter) != QBS_STATUS_OK) return 12;
    qbs_circuit_free(counter);

    if (qbs_circuit_append(c, QBS_GATE_KIND_CX, controls, 1, 0) != QBS_STATUS_INVALID_ARGUMENT) return 13;
    if (strlen(qbs_last_error()) == 0) return 14;

    unsigned long long value = 0;
    if (qbs_decode_counter("0101", 4, (uint64_t *)&value) != QBS_STATUS_OK || value != 5) return 15;

    double lo = 0, hi = 0;
    if (qbs_confidence_interval(100.0, 10.0, 0.05, &lo, &hi) != QBS_STATUS_OK) return 16;
    printf("ci %.2f %.2f version %s\n", lo, hi, qbs_version());
    qbs_circuit_free(c);
    return 0;
}
