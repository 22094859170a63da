#pragma once

#include <cstdint>

// Joe-Kuo direction numbers (new-joe-kuo-6) for Sobol sequences, dimensions 2..128.
// Dimension 1 is the van der Corput sequence and needs no table entry.

namespace salix::detail {

struct SobolDirectionEntry {
  std::uint32_t degree;     // s, degree of the primitive polynomial
  std::uint32_t poly;       // coefficients, bit s..0, leading and trailing 1 included
  std::uint32_t m[10];      // initial odd direction integers m_1..m_s
};

inline constexpr int kSobolMaxDim = 128;

inline constexpr SobolDirectionEntry kSobolDirections[127] = {
    {1, 3, {1, 0, 0, 0, 0, 0, 0, 0, 0, 0}},  // dim 2
    {2, 7, {1, 3, 0, 0, 0, 0, 0, 0, 0, 0}},  // dim 3
    {3, 11, {1, 3, 1, 0, 0, 0, 0, 0, 0, 0}},  // dim 4
    {3, 13, {1, 1, 1, 0, 0, 0, 0, 0, 0, 0}},  // dim 5
    {4, 19, {1, 1, 3, 3, 0, 0, 0, 0, 0, 0}},  // dim 6
    {4, 25, {1, 3, 5, 13, 0, 0, 0, 0, 0, 0}},  // dim 7
    {5, 37, {1, 1, 5, 5, 17, 0, 0, 0, 0, 0}},  // dim 8
    {5, 41, {1, 1, 5, 5, 5, 0, 0, 0, 0, 0}},  // dim 9
    {5, 47, {1, 1, 7, 11, 19, 0, 0, 0, 0, 0}},  // dim 10
    {5, 55, {1, 1, 5, 1, 1, 0, 0, 0, 0, 0}},  // dim 11
    {5, 59, {1, 1, 1, 3, 11, 0, 0, 0, 0, 0}},  // dim 12
    {5, 61, {1, 3, 5, 5, 31, 0, 0, 0, 0, 0}},  // dim 13
    {6, 67, {1, 3, 3, 9, 7, 49, 0, 0, 0, 0}},  // dim 14
    {6, 91, {1, 1, 1, 15, 21, 21, 0, 0, 0, 0}},  // dim 15
    {6, 97, {1, 3, 1, 13, 27, 49, 0, 0, 0, 0}},  // dim 16
    {6, 103, {1, 1, 1, 15, 7, 5, 0, 0, 0, 0}},  // dim 17
    {6, 109, {1, 3, 1, 15, 13, 25, 0, 0, 0, 0}},  // dim 18
    {6, 115, {1, 1, 5, 5, 19, 61, 0, 0, 0, 0}},  // dim 19
    {7, 131, {1, 3, 7, 11, 23, 15, 103, 0, 0, 0}},  // dim 20
    {7, 137, {1, 3, 7, 13, 13, 15, 69, 0, 0, 0}},  // dim 21
    {7, 143, {1, 1, 3, 13, 7, 35, 63, 0, 0, 0}},  // dim 22
    {7, 145, {1, 3, 5, 9, 1, 25, 53, 0, 0, 0}},  // dim 23
    {7, 157, {1, 3, 1, 13, 9, 35, 107, 0, 0, 0}},  // dim 24
    {7, 167, {1, 3, 1, 5, 27, 61, 31, 0, 0, 0}},  // dim 25
    {7, 171, {1, 1, 5, 11, 19, 41, 61, 0, 0, 0}},  // dim 26
    {7, 185, {1, 3, 5, 3, 3, 13, 69, 0, 0, 0}},  // dim 27
    {7, 191, {1, 1, 7, 13, 1, 19, 1, 0, 0, 0}},  // dim 28
    {7, 193, {1, 3, 7, 5, 13, 19, 59, 0, 0, 0}},  // dim 29
    {7, 203, {1, 1, 3, 9, 25, 29, 41, 0, 0, 0}},  // dim 30
    {7, 211, {1, 3, 5, 13, 23, 1, 55, 0, 0, 0}},  // dim 31
    {7, 213, {1, 3, 7, 3, 13, 59, 17, 0, 0, 0}},  // dim 32
    {7, 229, {1, 3, 1, 3, 5, 53, 69, 0, 0, 0}},  // dim 33
    {7, 239, {1, 1, 5, 5, 23, 33, 13, 0, 0, 0}},  // dim 34
    {7, 241, {1, 1, 7, 7, 1, 61, 123, 0, 0, 0}},  // dim 35
    {7, 247, {1, 1, 7, 9, 13, 61, 49, 0, 0, 0}},  // dim 36
    {7, 253, {1, 3, 3, 5, 3, 55, 33, 0, 0, 0}},  // dim 37
    {8, 285, {1, 3, 1, 15, 31, 13, 49, 245, 0, 0}},  // dim 38
    {8, 299, {1, 3, 5, 15, 31, 59, 63, 97, 0, 0}},  // dim 39
    {8, 301, {1, 3, 1, 11, 11, 11, 77, 249, 0, 0}},  // dim 40
    {8, 333, {1, 3, 1, 11, 27, 43, 71, 9, 0, 0}},  // dim 41
    {8, 351, {1, 1, 7, 15, 21, 11, 81, 45, 0, 0}},  // dim 42
    {8, 355, {1, 3, 7, 3, 25, 31, 65, 79, 0, 0}},  // dim 43
    {8, 357, {1, 3, 1, 1, 19, 11, 3, 205, 0, 0}},  // dim 44
    {8, 361, {1, 1, 5, 9, 19, 21, 29, 157, 0, 0}},  // dim 45
    {8, 369, {1, 3, 7, 11, 1, 33, 89, 185, 0, 0}},  // dim 46
    {8, 391, {1, 3, 3, 3, 15, 9, 79, 71, 0, 0}},  // dim 47
    {8, 397, {1, 3, 7, 11, 15, 39, 119, 27, 0, 0}},  // dim 48
    {8, 425, {1, 1, 3, 1, 11, 31, 97, 225, 0, 0}},  // dim 49
    {8, 451, {1, 1, 1, 3, 23, 43, 57, 177, 0, 0}},  // dim 50
    {8, 463, {1, 3, 7, 7, 17, 17, 37, 71, 0, 0}},  // dim 51
    {8, 487, {1, 3, 1, 5, 27, 63, 123, 213, 0, 0}},  // dim 52
    {8, 501, {1, 1, 3, 5, 11, 43, 53, 133, 0, 0}},  // dim 53
    {9, 529, {1, 3, 5, 5, 29, 17, 47, 173, 479, 0}},  // dim 54
    {9, 539, {1, 3, 3, 11, 3, 1, 109, 9, 69, 0}},  // dim 55
    {9, 545, {1, 1, 1, 5, 17, 39, 23, 5, 343, 0}},  // dim 56
    {9, 557, {1, 3, 1, 5, 25, 15, 31, 103, 499, 0}},  // dim 57
    {9, 563, {1, 1, 1, 11, 11, 17, 63, 105, 183, 0}},  // dim 58
    {9, 601, {1, 1, 5, 11, 9, 29, 97, 231, 363, 0}},  // dim 59
    {9, 607, {1, 1, 5, 15, 19, 45, 41, 7, 383, 0}},  // dim 60
    {9, 617, {1, 3, 7, 7, 31, 19, 83, 137, 221, 0}},  // dim 61
    {9, 623, {1, 1, 1, 3, 23, 15, 111, 223, 83, 0}},  // dim 62
    {9, 631, {1, 1, 5, 13, 31, 15, 55, 25, 161, 0}},  // dim 63
    {9, 637, {1, 1, 3, 13, 25, 47, 39, 87, 257, 0}},  // dim 64
    {9, 647, {1, 1, 1, 11, 21, 53, 125, 249, 293, 0}},  // dim 65
    {9, 661, {1, 1, 7, 11, 11, 7, 57, 79, 323, 0}},  // dim 66
    {9, 675, {1, 1, 5, 5, 17, 13, 81, 3, 131, 0}},  // dim 67
    {9, 677, {1, 1, 7, 13, 23, 7, 65, 251, 475, 0}},  // dim 68
    {9, 687, {1, 3, 5, 1, 9, 43, 3, 149, 11, 0}},  // dim 69
    {9, 695, {1, 1, 3, 13, 31, 13, 13, 255, 487, 0}},  // dim 70
    {9, 701, {1, 3, 3, 1, 5, 63, 89, 91, 127, 0}},  // dim 71
    {9, 719, {1, 1, 3, 3, 1, 19, 123, 127, 237, 0}},  // dim 72
    {9, 721, {1, 1, 5, 7, 23, 31, 37, 243, 289, 0}},  // dim 73
    {9, 731, {1, 1, 5, 11, 17, 53, 117, 183, 491, 0}},  // dim 74
    {9, 757, {1, 1, 1, 5, 1, 13, 13, 209, 345, 0}},  // dim 75
    {9, 761, {1, 1, 3, 15, 1, 57, 115, 7, 33, 0}},  // dim 76
    {9, 787, {1, 3, 1, 11, 7, 43, 81, 207, 175, 0}},  // dim 77
    {9, 789, {1, 3, 1, 1, 15, 27, 63, 255, 49, 0}},  // dim 78
    {9, 799, {1, 3, 5, 3, 27, 61, 105, 171, 305, 0}},  // dim 79
    {9, 803, {1, 1, 5, 3, 1, 3, 57, 249, 149, 0}},  // dim 80
    {9, 817, {1, 1, 3, 5, 5, 57, 15, 13, 159, 0}},  // dim 81
    {9, 827, {1, 1, 1, 11, 7, 11, 105, 141, 225, 0}},  // dim 82
    {9, 847, {1, 3, 3, 5, 27, 59, 121, 101, 271, 0}},  // dim 83
    {9, 859, {1, 3, 5, 9, 11, 49, 51, 59, 115, 0}},  // dim 84
    {9, 865, {1, 1, 7, 1, 23, 45, 125, 71, 419, 0}},  // dim 85
    {9, 875, {1, 1, 3, 5, 23, 5, 105, 109, 75, 0}},  // dim 86
    {9, 877, {1, 1, 7, 15, 7, 11, 67, 121, 453, 0}},  // dim 87
    {9, 883, {1, 3, 7, 3, 9, 13, 31, 27, 449, 0}},  // dim 88
    {9, 895, {1, 3, 1, 15, 19, 39, 39, 89, 15, 0}},  // dim 89
    {9, 901, {1, 1, 1, 1, 1, 33, 73, 145, 379, 0}},  // dim 90
    {9, 911, {1, 3, 1, 15, 15, 43, 29, 13, 483, 0}},  // dim 91
    {9, 949, {1, 1, 7, 3, 19, 27, 85, 131, 431, 0}},  // dim 92
    {9, 953, {1, 3, 3, 3, 5, 35, 23, 195, 349, 0}},  // dim 93
    {9, 967, {1, 3, 3, 7, 9, 27, 39, 59, 297, 0}},  // dim 94
    {9, 971, {1, 1, 3, 9, 11, 17, 13, 241, 157, 0}},  // dim 95
    {9, 973, {1, 3, 7, 15, 25, 57, 33, 189, 213, 0}},  // dim 96
    {9, 981, {1, 1, 7, 1, 9, 55, 73, 83, 217, 0}},  // dim 97
    {9, 985, {1, 3, 3, 13, 19, 27, 23, 113, 249, 0}},  // dim 98
    {9, 995, {1, 3, 5, 3, 23, 43, 3, 253, 479, 0}},  // dim 99
    {9, 1001, {1, 1, 5, 5, 11, 5, 45, 117, 217, 0}},  // dim 100
    {9, 1019, {1, 3, 3, 7, 29, 37, 33, 123, 147, 0}},  // dim 101
    {10, 1033, {1, 3, 1, 15, 5, 5, 37, 227, 223, 459}},  // dim 102
    {10, 1051, {1, 1, 7, 5, 5, 39, 63, 255, 135, 487}},  // dim 103
    {10, 1063, {1, 3, 1, 7, 9, 7, 87, 249, 217, 599}},  // dim 104
    {10, 1069, {1, 1, 3, 13, 9, 47, 7, 225, 363, 247}},  // dim 105
    {10, 1125, {1, 3, 7, 13, 19, 13, 9, 67, 9, 737}},  // dim 106
    {10, 1135, {1, 3, 5, 5, 19, 59, 7, 41, 319, 677}},  // dim 107
    {10, 1153, {1, 1, 5, 3, 31, 63, 15, 43, 207, 789}},  // dim 108
    {10, 1163, {1, 1, 7, 9, 13, 39, 3, 47, 497, 169}},  // dim 109
    {10, 1221, {1, 3, 1, 7, 21, 17, 97, 19, 415, 905}},  // dim 110
    {10, 1239, {1, 3, 7, 1, 3, 31, 71, 111, 165, 127}},  // dim 111
    {10, 1255, {1, 1, 5, 11, 1, 61, 83, 119, 203, 847}},  // dim 112
    {10, 1267, {1, 3, 3, 13, 9, 61, 19, 97, 47, 35}},  // dim 113
    {10, 1279, {1, 1, 7, 7, 15, 29, 63, 95, 417, 469}},  // dim 114
    {10, 1293, {1, 3, 1, 9, 25, 9, 71, 57, 213, 385}},  // dim 115
    {10, 1305, {1, 3, 5, 13, 31, 47, 101, 57, 39, 341}},  // dim 116
    {10, 1315, {1, 1, 3, 3, 31, 57, 125, 173, 365, 551}},  // dim 117
    {10, 1329, {1, 3, 7, 1, 13, 57, 67, 157, 451, 707}},  // dim 118
    {10, 1341, {1, 1, 1, 7, 21, 13, 105, 89, 429, 965}},  // dim 119
    {10, 1347, {1, 1, 5, 9, 17, 51, 45, 119, 157, 141}},  // dim 120
    {10, 1367, {1, 3, 7, 7, 13, 45, 91, 9, 129, 741}},  // dim 121
    {10, 1387, {1, 3, 7, 1, 23, 57, 67, 141, 151, 571}},  // dim 122
    {10, 1413, {1, 1, 3, 11, 17, 47, 93, 107, 375, 157}},  // dim 123
    {10, 1423, {1, 3, 3, 5, 11, 21, 43, 51, 169, 915}},  // dim 124
    {10, 1431, {1, 1, 5, 3, 15, 55, 101, 67, 455, 625}},  // dim 125
    {10, 1441, {1, 3, 5, 9, 1, 23, 29, 47, 345, 595}},  // dim 126
    {10, 1479, {1, 3, 7, 7, 5, 49, 29, 155, 323, 589}},  // dim 127
    {10, 1509, {1, 3, 3, 7, 5, 41, 127, 61, 261, 717}},  // dim 128
};

}  // namespace salix::detail
