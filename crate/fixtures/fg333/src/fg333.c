#include "fg333.h"

uint32_t frm;
uint32_t bComSuc;
int32_t cntLenRd;
int32_t cntHead;
int32_t cntCheck;
int32_t cntUpdata;
int32_t totalLenRd;
int32_t totalHead;
int32_t totalCheck;
int32_t totalUpdata;

/* Frame layout: head (2 bytes, big endian), frame count, 15 payload bytes,
 * additive checksum over bytes 2..17. */
uint32_t Fg333saCheckFun(uint8_t *buffer, uint32_t rdLen)
{
    uint8_t sum = 0;
    uint32_t i;

    bComSuc = 0;
    if (rdLen != FG333_FRAME_LEN) {
        cntLenRd++;
        totalLenRd++;
        return 0;
    }
    if (buffer[2] == frm) {
        cntUpdata++;
        totalUpdata++;
        return 0;
    }
    frm = buffer[2];
    if ((((uint32_t)buffer[0] << 8) | buffer[1]) != FG333_HEAD) {
        cntHead++;
        totalHead++;
        return 0;
    }
    for (i = 2; i < FG333_FRAME_LEN - 1; i++) {
        sum += buffer[i];
    }
    if (sum != buffer[FG333_FRAME_LEN - 1]) {
        cntCheck++;
        totalCheck++;
        return 0;
    }
    cntLenRd = 0;
    cntUpdata = 0;
    cntHead = 0;
    cntCheck = 0;
    bComSuc = 1;
    return 1;
}
