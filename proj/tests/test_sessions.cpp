#include <doctest.h>
TEST_SUITE("sessions") {}
