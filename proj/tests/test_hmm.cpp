#include <doctest.h>
TEST_SUITE("hmm") {}
