#include <cstdio>

int main() {
    std::puts("seqdml: placeholder");
    return 0;
}
