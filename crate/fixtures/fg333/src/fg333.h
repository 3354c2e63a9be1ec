#ifndef FG333_H
#define FG333_H

#include <stdint.h>

#define FG333_FRAME_LEN 19u
#define FG333_HEAD 0xAC12u

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

/* Returns 1 when the frame passes every check, 0 otherwise. */
uint32_t Fg333saCheckFun(uint8_t *buffer, uint32_t rdLen);

#endif
