#include <doctest.h>
TEST_SUITE("anomaly") {}
