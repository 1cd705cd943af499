#include <cstdio>

int main() {
    std::printf("waveop cli placeholder\n");
    return 0;
}
