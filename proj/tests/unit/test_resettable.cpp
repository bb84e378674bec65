#include <doctest.h>

TEST_SUITE_BEGIN("resettable");
TEST_SUITE_END();
