#include <doctest.h>

TEST_SUITE_BEGIN("analysis");
TEST_SUITE_END();
