#include <doctest.h>

TEST_SUITE_BEGIN("body");
TEST_SUITE_END();
