#include <doctest.h>

TEST_SUITE_BEGIN("simulator");
TEST_SUITE_END();
