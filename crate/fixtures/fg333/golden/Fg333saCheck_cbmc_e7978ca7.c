/* Fg333saCheck verification harness (cbmc)
 * preconditions: (rdLen != 19)
 * properties: P1, P2
 */
#include <stdint.h>
#include <assert.h>
#include "fg333.h"

#define __ASSUME(cond) __CPROVER_assume(cond)
#define __ASSERT(cond, msg) __CPROVER_assert(cond, msg)

uint8_t nondet_uint8_t(void);
uint32_t nondet_uint32_t(void);
int32_t nondet_int32_t(void);

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
        buffer[__i] = nondet_uint8_t();
    }
    rdLen = nondet_uint32_t();
    frm = nondet_uint32_t();
    bComSuc = nondet_uint32_t();
    cntLenRd = nondet_int32_t();
    cntHead = nondet_int32_t();
    cntCheck = nondet_int32_t();
    cntUpdata = nondet_int32_t();
    totalLenRd = nondet_int32_t();
    totalHead = nondet_int32_t();
    totalCheck = nondet_int32_t();
    totalUpdata = nondet_int32_t();

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
