/* Fg333saCheck verification harness (cpachecker)
 * preconditions: (rdLen != 19)
 * properties: P1, P2
 */
#include <stdint.h>
#include <assert.h>
#include "fg333.h"

extern void __VERIFIER_assume(int cond);
extern unsigned char __VERIFIER_nondet_uchar(void);
extern unsigned int __VERIFIER_nondet_uint(void);
extern int __VERIFIER_nondet_int(void);
void reach_error(void) { assert(0); }

#define __ASSUME(cond) __VERIFIER_assume(cond)
#define __ASSERT(cond, msg) do { if (!(cond)) reach_error(); } while (0)

extern uint32_t frm;
extern uint32_t bComSuc;
extern int32_t cntLenRd;
extern int32_t cntHead;
extern int32_t cntCheck;
extern int32_t cntUpdata;
extern int32_t totalLenRd;
extern int32_t totalHead;
extern int32_t totalCheck;
extern int32_t totalUpdata;

int main(void)
{
    uint8_t buffer[19];
    uint32_t rdLen;
    uint32_t __ret;
    int __i;

    for (__i = 0; __i < 19; __i++) {
        buffer[__i] = __VERIFIER_nondet_uchar();
    }
    rdLen = __VERIFIER_nondet_uint();
    frm = __VERIFIER_nondet_uint();
    bComSuc = __VERIFIER_nondet_uint();
    cntLenRd = __VERIFIER_nondet_int();
    cntHead = __VERIFIER_nondet_int();
    cntCheck = __VERIFIER_nondet_int();
    cntUpdata = __VERIFIER_nondet_int();
    totalLenRd = __VERIFIER_nondet_int();
    totalHead = __VERIFIER_nondet_int();
    totalCheck = __VERIFIER_nondet_int();
    totalUpdata = __VERIFIER_nondet_int();

    __ASSUME((rdLen != 19));

    const int32_t __pre_cntLenRd = cntLenRd;
    const int32_t __pre_totalLenRd = totalLenRd;
    const int32_t __pre_totalHead = totalHead;

    __ret = Fg333saCheckFun(buffer, rdLen);

    __ASSERT((cntLenRd == (__pre_cntLenRd + 1)), "P1");
    __ASSERT((totalLenRd == (__pre_totalLenRd + 1)), "P1");
    __ASSERT((__ret == 0), "P1");
    __ASSERT((bComSuc == 0), "P2");
    __ASSERT((totalHead == __pre_totalHead), "P2");
    return 0;
}
