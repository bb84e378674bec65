#include <doctest.h>

TEST_SUITE_BEGIN("preamble");
TEST_SUITE_END();
