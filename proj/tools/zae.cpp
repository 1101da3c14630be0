#include <cstdio>

int main() {
  std::puts("zae: subcommands not wired up yet");
  return 1;
}
