/* Fg333saCheck verification harness (klee)
 * preconditions: (rdLen != 19)
 * properties: P1, P2
 */
#include <stdint.h>
#include <assert.h>
#include "fg333.h"

extern void klee_make_symbolic(void *addr, unsigned long nbytes, const char *name);
extern void klee_assume(unsigned long condition);

#define __ASSUME(cond) klee_assume(cond)
#define __ASSERT(cond, msg) do { if (!(cond)) assert(0 && (msg)); } while (0)

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

    klee_make_symbolic(buffer, sizeof(buffer), "buffer");
    klee_make_symbolic(&rdLen, sizeof(rdLen), "rdLen");
    klee_make_symbolic(&frm, sizeof(frm), "frm");
    klee_make_symbolic(&bComSuc, sizeof(bComSuc), "bComSuc");
    klee_make_symbolic(&cntLenRd, sizeof(cntLenRd), "cntLenRd");
    klee_make_symbolic(&cntHead, sizeof(cntHead), "cntHead");
    klee_make_symbolic(&cntCheck, sizeof(cntCheck), "cntCheck");
    klee_make_symbolic(&cntUpdata, sizeof(cntUpdata), "cntUpdata");
    klee_make_symbolic(&totalLenRd, sizeof(totalLenRd), "totalLenRd");
    klee_make_symbolic(&totalHead, sizeof(totalHead), "totalHead");
    klee_make_symbolic(&totalCheck, sizeof(totalCheck), "totalCheck");
    klee_make_symbolic(&totalUpdata, sizeof(totalUpdata), "totalUpdata");

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
