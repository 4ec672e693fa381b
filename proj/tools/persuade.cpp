#include "persuasion/persuasion.hpp"
int main() { return 0; }
