#include <stdio.h>
#include "perpetuity.h"

int main(void) {
    const char *text = "joint.A.variant = beta\njoint.A.p = 2\njoint.A.q = 1\n"
                       "joint.B.variant = exponential\njoint.B.rate = 1\n";
    PerpJoint *joint = NULL;
    if (perp_joint_from_config(text, &joint) != PERP_STATUS_OK) {
        fprintf(stderr, "%s\n", perp_last_error());
        return 1;
    }
    PerpVerdict verdict;
    PerpStatus status = perp_moment_verdict(joint, 0.5, &verdict);
    perp_joint_free(joint);
    return status == PERP_STATUS_OK && verdict == PERP_VERDICT_FINITE ? 0 : 1;
}
