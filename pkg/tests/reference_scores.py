"""Reference per-benchmark score tables from the published comparison experiments.

Used to validate that gap and averaging arithmetic reproduces the printed
headline numbers from the per-benchmark values. Keys follow the package's
canonical benchmark names; values are accuracy percentages as printed.
"""

# Long-CoT vs short-CoT fine-tuning: per-benchmark scores for each student,
# the printed per-benchmark deltas, and the printed average delta.
LONG_SHORT_TABLE = {
    "llama-3.2-1b": {
        "first": {"math": 28.6, "gsm8k": 42.3, "aime24": 0.00, "amc23": 2.50, "olympiadbench": 5.48},
        "second": {"math": 33.4, "gsm8k": 49.2, "aime24": 0.00, "amc23": 7.50, "olympiadbench": 7.40},
        "printed_delta": {"math": -4.78, "gsm8k": -6.90, "aime24": 0.00, "amc23": -5.00, "olympiadbench": -1.92},
        "printed_avg_delta": -3.72,
    },
    "llama-3.2-3b": {
        "first": {"math": 48.7, "gsm8k": 75.1, "aime24": 3.33, "amc23": 17.5, "olympiadbench": 17.6},
        "second": {"math": 50.9, "gsm8k": 77.5, "aime24": 3.33, "amc23": 15.0, "olympiadbench": 18.7},
        "printed_delta": {"math": -2.14, "gsm8k": -2.42, "aime24": 0.00, "amc23": 2.50, "olympiadbench": -1.04},
        "printed_avg_delta": -0.619,
    },
    "llama-3.1-8b": {
        "first": {"math": 50.0, "gsm8k": 81.4, "aime24": 0.00, "amc23": 27.5, "olympiadbench": 17.3},
        "second": {"math": 44.6, "gsm8k": 75.5, "aime24": 0.00, "amc23": 22.5, "olympiadbench": 14.8},
        "printed_delta": {"math": 5.36, "gsm8k": 5.84, "aime24": 0.00, "amc23": 5.00, "olympiadbench": 2.52},
        "printed_avg_delta": 3.74,
    },
    "llama-3.3-70b": {
        "first": {"math": 75.3, "gsm8k": 92.7, "aime24": 26.7, "amc23": 55.0, "olympiadbench": 41.3},
        "second": {"math": 74.9, "gsm8k": 91.2, "aime24": 13.3, "amc23": 52.5, "olympiadbench": 39.7},
        "printed_delta": {"math": 0.340, "gsm8k": 1.44, "aime24": 13.3, "amc23": 2.50, "olympiadbench": 1.63},
        "printed_avg_delta": 3.85,
    },
    "qwen2.5-0.5b": {
        "first": {"math": 23.0, "gsm8k": 39.5, "aime24": 0.00, "amc23": 7.50, "olympiadbench": 4.00},
        "second": {"math": 31.5, "gsm8k": 45.3, "aime24": 0.00, "amc23": 15.0, "olympiadbench": 5.93},
        "printed_delta": {"math": -8.44, "gsm8k": -5.84, "aime24": 0.00, "amc23": -7.50, "olympiadbench": -1.93},
        "printed_avg_delta": -4.74,
    },
    "qwen2.5-1.5b": {
        "first": {"math": 41.6, "gsm8k": 63.8, "aime24": 0.00, "amc23": 17.5, "olympiadbench": 12.3},
        "second": {"math": 52.3, "gsm8k": 71.7, "aime24": 0.00, "amc23": 27.5, "olympiadbench": 19.4},
        "printed_delta": {"math": -10.7, "gsm8k": -7.89, "aime24": 0.00, "amc23": -10.0, "olympiadbench": -7.11},
        "printed_avg_delta": -7.13,
    },
    "qwen2.5-3b": {
        "first": {"math": 56.2, "gsm8k": 80.0, "aime24": 3.33, "amc23": 37.5, "olympiadbench": 24.4},
        "second": {"math": 61.0, "gsm8k": 82.0, "aime24": 10.0, "amc23": 37.5, "olympiadbench": 26.4},
        "printed_delta": {"math": -4.84, "gsm8k": -1.98, "aime24": -6.67, "amc23": 0.00, "olympiadbench": -1.93},
        "printed_avg_delta": -3.08,
    },
    "qwen2.5-7b": {
        "first": {"math": 68.2, "gsm8k": 86.2, "aime24": 13.3, "amc23": 40.0, "olympiadbench": 36.6},
        "second": {"math": 67.8, "gsm8k": 85.7, "aime24": 6.67, "amc23": 40.0, "olympiadbench": 35.7},
        "printed_delta": {"math": 0.460, "gsm8k": 0.560, "aime24": 6.67, "amc23": 0.00, "olympiadbench": 0.889},
        "printed_avg_delta": 1.72,
    },
    "qwen2.5-14b": {
        "first": {"math": 78.3, "gsm8k": 93.3, "aime24": 20.0, "amc23": 60.0, "olympiadbench": 44.4},
        "second": {"math": 76.2, "gsm8k": 92.5, "aime24": 6.67, "amc23": 55.0, "olympiadbench": 40.9},
        "printed_delta": {"math": 2.04, "gsm8k": 0.760, "aime24": 13.3, "amc23": 5.00, "olympiadbench": 3.56},
        "printed_avg_delta": 4.94,
    },
    "qwen2.5-32b": {
        "first": {"math": 84.8, "gsm8k": 94.9, "aime24": 40.0, "amc23": 85.0, "olympiadbench": 60.4},
        "second": {"math": 82.3, "gsm8k": 94.3, "aime24": 10.0, "amc23": 62.5, "olympiadbench": 47.3},
        "printed_delta": {"math": 2.44, "gsm8k": 0.610, "aime24": 30.0, "amc23": 22.5, "olympiadbench": 13.2},
        "printed_avg_delta": 13.7,
    },
}

# Large-teacher vs small-teacher fine-tuning, same layout.
LARGE_SMALL_TABLE = {
    "llama-3.2-1b": {
        "first": {"math": 29.8, "gsm8k": 44.4, "aime24": 0.00, "amc23": 2.50, "olympiadbench": 6.07},
        "second": {"math": 29.6, "gsm8k": 47.5, "aime24": 0.00, "amc23": 7.50, "olympiadbench": 7.70},
        "printed_delta": {"math": 0.160, "gsm8k": -3.18, "aime24": 0.00, "amc23": -5.00, "olympiadbench": -1.63},
        "printed_avg_delta": -1.93,
    },
    "llama-3.2-3b": {
        "first": {"math": 47.4, "gsm8k": 71.2, "aime24": 3.33, "amc23": 25.0, "olympiadbench": 16.9},
        "second": {"math": 47.9, "gsm8k": 74.1, "aime24": 0.00, "amc23": 17.5, "olympiadbench": 16.4},
        "printed_delta": {"math": -0.500, "gsm8k": -2.88, "aime24": 3.33, "amc23": 7.50, "olympiadbench": 0.445},
        "printed_avg_delta": 1.58,
    },
    "llama-3.2-8b": {
        "first": {"math": 37.6, "gsm8k": 67.0, "aime24": 6.67, "amc23": 7.50, "olympiadbench": 9.19},
        "second": {"math": 37.6, "gsm8k": 69.2, "aime24": 0.00, "amc23": 7.50, "olympiadbench": 11.0},
        "printed_delta": {"math": -0.040, "gsm8k": -2.20, "aime24": 6.67, "amc23": 0.00, "olympiadbench": -1.78},
        "printed_avg_delta": 0.530,
    },
    "llama-3.2-70b": {
        "first": {"math": 74.5, "gsm8k": 92.0, "aime24": 16.7, "amc23": 67.5, "olympiadbench": 37.3},
        "second": {"math": 72.2, "gsm8k": 92.2, "aime24": 16.7, "amc23": 50.0, "olympiadbench": 35.7},
        "printed_delta": {"math": 2.28, "gsm8k": -0.152, "aime24": 0.00, "amc23": 17.5, "olympiadbench": 1.63},
        "printed_avg_delta": 4.25,
    },
    "qwen2.5-0.5b": {
        "first": {"math": 30.0, "gsm8k": 43.1, "aime24": 0.00, "amc23": 5.00, "olympiadbench": 6.52},
        "second": {"math": 31.0, "gsm8k": 45.4, "aime24": 0.00, "amc23": 17.5, "olympiadbench": 8.30},
        "printed_delta": {"math": -0.920, "gsm8k": -2.35, "aime24": 0.00, "amc23": -12.5, "olympiadbench": -1.78},
        "printed_avg_delta": -3.51,
    },
    "qwen2.5-1.5b": {
        "first": {"math": 50.3, "gsm8k": 70.6, "aime24": 0.00, "amc23": 22.5, "olympiadbench": 17.8},
        "second": {"math": 50.7, "gsm8k": 71.0, "aime24": 3.33, "amc23": 20.0, "olympiadbench": 20.0},
        "printed_delta": {"math": -0.440, "gsm8k": -0.455, "aime24": -3.33, "amc23": 2.50, "olympiadbench": -2.22},
        "printed_avg_delta": -0.790,
    },
    "qwen2.5-3b": {
        "first": {"math": 57.5, "gsm8k": 79.9, "aime24": 0.00, "amc23": 35.0, "olympiadbench": 25.9},
        "second": {"math": 60.3, "gsm8k": 79.5, "aime24": 3.33, "amc23": 27.5, "olympiadbench": 26.4},
        "printed_delta": {"math": -2.82, "gsm8k": 0.379, "aime24": -3.33, "amc23": 7.50, "olympiadbench": -0.444},
        "printed_avg_delta": 0.256,
    },
    "qwen2.5-7b": {
        "first": {"math": 71.3, "gsm8k": 87.8, "aime24": 6.67, "amc23": 40.0, "olympiadbench": 38.8},
        "second": {"math": 63.6, "gsm8k": 84.1, "aime24": 0.00, "amc23": 35.0, "olympiadbench": 29.0},
        "printed_delta": {"math": 7.66, "gsm8k": 3.72, "aime24": 6.67, "amc23": 5.00, "olympiadbench": 9.78},
        "printed_avg_delta": 6.56,
    },
    "qwen2.5-14b": {
        "first": {"math": 76.4, "gsm8k": 93.1, "aime24": 6.67, "amc23": 47.5, "olympiadbench": 41.0},
        "second": {"math": 72.8, "gsm8k": 89.6, "aime24": 3.33, "amc23": 45.0, "olympiadbench": 39.0},
        "printed_delta": {"math": 3.66, "gsm8k": 3.49, "aime24": 3.33, "amc23": 2.50, "olympiadbench": 2.07},
        "printed_avg_delta": 3.01,
    },
    "qwen2.5-32b": {
        "first": {"math": 80.5, "gsm8k": 92.2, "aime24": 20.0, "amc23": 57.5, "olympiadbench": 47.4},
        "second": {"math": 76.8, "gsm8k": 92.7, "aime24": 3.33, "amc23": 50.0, "olympiadbench": 42.4},
        "printed_delta": {"math": 3.72, "gsm8k": -0.531, "aime24": 16.7, "amc23": 7.50, "olympiadbench": 5.04},
        "printed_avg_delta": 6.48,
    },
}

# Headline averages: model -> (P_first, P_second, printed delta, better side).
HEADLINE_LONG_SHORT = {
    "qwen2.5-0.5b": (14.8, 19.5, -4.7, "second"),
    "qwen2.5-1.5b": (27.0, 34.2, -7.1, "second"),
    "qwen2.5-3b": (40.3, 43.4, -3.1, "second"),
    "qwen2.5-7b": (48.9, 47.2, 1.7, "first"),
    "qwen2.5-14b": (59.2, 54.3, 4.9, "first"),
    "qwen2.5-32b": (73.0, 59.3, 13.7, "first"),
    "llama-3.2-1b": (15.8, 19.5, -3.7, "second"),
    "llama-3.2-3b": (32.5, 33.1, -0.6, "second"),
    "llama-3.1-8b": (35.2, 31.5, 3.7, "first"),
    "llama-3.3-70b": (58.2, 54.3, 3.8, "first"),
}

HEADLINE_LARGE_SMALL = {
    "qwen2.5-0.5b": (16.9, 20.4, -3.5, "second"),
    "qwen2.5-1.5b": (32.2, 33.0, -0.8, "second"),
    "qwen2.5-3b": (39.7, 39.4, 0.3, "first"),
    "qwen2.5-7b": (48.9, 42.3, 6.6, "first"),
    "qwen2.5-14b": (52.9, 49.9, 3.0, "first"),
    "qwen2.5-32b": (59.5, 53.0, 6.5, "first"),
    "llama-3.2-1b": (16.5, 18.5, -1.9, "second"),
    "llama-3.2-3b": (32.8, 31.2, 1.6, "first"),
    "llama-3.2-8b": (25.6, 25.1, 0.5, "first"),
    "llama-3.2-70b": (57.6, 53.3, 4.3, "first"),
}

# Mix-distillation comparison: 14 rows of (student, method, per-benchmark
# percentages, printed average).
MIX_TABLE_ROWS = [
    ("qwen2.5-3b", "long_cot",
     {"math": 56.2, "amc23": 37.5, "gsm8k": 80.0, "olympiadbench": 24.4, "aime24": 3.3}, 40.3),
    ("qwen2.5-3b", "short_cot",
     {"math": 61.0, "amc23": 37.5, "gsm8k": 82.0, "olympiadbench": 26.4, "aime24": 10.0}, 43.4),
    ("qwen2.5-3b", "strong_model_cot",
     {"math": 57.5, "amc23": 35.0, "gsm8k": 80.0, "olympiadbench": 25.9, "aime24": 0.0}, 39.7),
    ("qwen2.5-3b", "weak_model_cot",
     {"math": 60.3, "amc23": 27.5, "gsm8k": 79.5, "olympiadbench": 26.4, "aime24": 3.3}, 39.4),
    ("qwen2.5-3b", "r1_distill_long_cot",
     {"math": 50.7, "amc23": 20.0, "gsm8k": 81.2, "olympiadbench": 15.7, "aime24": 0.0}, 33.5),
    ("qwen2.5-3b", "mix_long",
     {"math": 64.7, "amc23": 45.0, "gsm8k": 81.4, "olympiadbench": 28.6, "aime24": 10.0}, 45.9),
    ("qwen2.5-3b", "mix_large",
     {"math": 65.8, "amc23": 42.5, "gsm8k": 81.7, "olympiadbench": 29.0, "aime24": 10.0}, 45.8),
    ("llama3.2-3b", "long_cot",
     {"math": 48.7, "amc23": 17.5, "gsm8k": 75.1, "olympiadbench": 17.6, "aime24": 3.3}, 32.5),
    ("llama3.2-3b", "short_cot",
     {"math": 50.9, "amc23": 15.0, "gsm8k": 77.5, "olympiadbench": 18.7, "aime24": 3.3}, 33.1),
    ("llama3.2-3b", "strong_model_cot",
     {"math": 47.4, "amc23": 25.0, "gsm8k": 71.2, "olympiadbench": 16.9, "aime24": 3.3}, 32.8),
    # aime value from the per-benchmark comparison table; the mix table's 3.3
    # cell contradicts all three printed averages for this configuration
    ("llama3.2-3b", "weak_model_cot",
     {"math": 47.9, "amc23": 17.5, "gsm8k": 74.1, "olympiadbench": 16.4, "aime24": 0.0}, 31.2),
    ("llama3.2-3b", "r1_distill_long_cot",
     {"math": 48.5, "amc23": 17.5, "gsm8k": 77.7, "olympiadbench": 16.1, "aime24": 6.7}, 33.3),
    ("llama3.2-3b", "mix_long",
     {"math": 53.0, "amc23": 22.5, "gsm8k": 79.4, "olympiadbench": 17.2, "aime24": 3.3}, 35.1),
    ("llama3.2-3b", "mix_large",
     {"math": 51.8, "amc23": 25.0, "gsm8k": 76.3, "olympiadbench": 17.2, "aime24": 3.3}, 34.7),
]
