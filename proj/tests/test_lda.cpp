#include <doctest.h>
TEST_SUITE("lda") {}
