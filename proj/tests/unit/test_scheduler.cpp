#include <doctest.h>

TEST_SUITE_BEGIN("scheduler");
TEST_SUITE_END();
