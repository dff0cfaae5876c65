"""
Configuration constants for the sequential fine-tuning lab.

This module centralizes all defaults, file names, and message strings so they
are easy to find and modify. Run configuration files may override every key
listed in CONFIG_DEFAULTS.
"""

# ==== METHODS ====
METHOD_SEQFT = "seqft"
METHOD_SEQFT_LLRD = "seqft-llrd"
METHOD_SEQFT_TRANS = "seqft-trans"
METHOD_SEQFT_TRANS_LLRD = "seqft-trans-llrd"
METHODS = (METHOD_SEQFT, METHOD_SEQFT_LLRD, METHOD_SEQFT_TRANS, METHOD_SEQFT_TRANS_LLRD)

OPTIMIZER_ADAMW = "adamw"
OPTIMIZER_PLAIN_SGD = "plain-sgd"
OPTIMIZERS = (OPTIMIZER_ADAMW, OPTIMIZER_PLAIN_SGD)

# ==== MODEL ====
DEFAULT_EMBED_DIM = 32
DEFAULT_NUM_BLOCKS = 2
DEFAULT_NUM_HEADS = 2
DEFAULT_FFN_DIM = 64
DEFAULT_MAX_SEQ_LEN = 32
NUM_CLASSES = 2
PAD_ID = 0  # real tokens always have ids >= 1
HEAD_INIT_STD = 0.02  # keeps untrained logits near zero
DEFAULT_ALIGNMENT = 0.0  # variance share a token embedding takes from its translation-equivalent row

# ==== TRAINING ====
DEFAULT_EPOCHS = 5
DEFAULT_BASE_LR = 2e-5
DEFAULT_ZETA = 1.0
LLRD_ZETAS = (0.75, 0.85)  # LLRD-enabled settings
DEFAULT_BATCH_SIZE = 16
DEFAULT_VALIDATION_FRACTION = 0.2
DEFAULT_WEIGHT_DECAY = 0.01
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

# ==== DATA ====
DEFAULT_NUM_LANGS = 6
DEFAULT_NUM_CATEGORIES = 10
DEFAULT_TRAIN_SIZE = 100
DEFAULT_TEST_SIZE = 100
DEFAULT_TOKENS_PER_LANG = 120
DEFAULT_SENTIMENT_TOKENS = 6  # per polarity
DEFAULT_TOPIC_TOKENS = 6  # per category
DEFAULT_MIN_LEN = 8
DEFAULT_MAX_LEN = 16
DEFAULT_POOL_PER_LABEL = 60
DEFAULT_HASH_BUCKETS = 4096
DEFAULT_AUGMENT_FRACTION = 0.1

LANGUAGE_NAMES = ("de", "en", "es", "fr", "ja", "zh")
CATEGORY_NAMES = (
    "apparel", "automotive", "beauty", "drugstore", "grocery",
    "home", "kitchen", "musical_instruments", "sports", "wireless",
)

# ==== SEQUENCE ====
DEFAULT_HOPS = 50
DEFAULT_SEQUENCE_ID = "S1"

# ==== EVALUATION ====
DEFAULT_COLLAPSE_THRESHOLD = 0.95
DEFAULT_EVAL_WORKERS = 1
ZETA_SWEEP_VALUES = (0.38, 0.5, 0.75, 0.85, 0.95, 1.0)
SUMMARY_SCALE = 100.0
SUMMARY_DECIMALS = 2

# ==== SEEDS ====
# Independent random streams derived from (seed, hop index, stream id).
STREAM_SAMPLE = 0
STREAM_AUGMENT = 1
STREAM_TRAIN = 2
STREAM_MODEL_INIT = 3

# ==== RUN CONFIGURATION KEYS ====
# Ordered dotted key -> default. The default's type decides how values parse;
# None marks an optional value (integers or paths, "none" to clear).
CONFIG_DEFAULTS = {
    "corpus.num_langs": DEFAULT_NUM_LANGS,
    "corpus.num_categories": DEFAULT_NUM_CATEGORIES,
    "corpus.seed": None,
    "corpus.tokens_per_lang": DEFAULT_TOKENS_PER_LANG,
    "corpus.sentiment_tokens": DEFAULT_SENTIMENT_TOKENS,
    "corpus.topic_tokens": DEFAULT_TOPIC_TOKENS,
    "corpus.min_len": DEFAULT_MIN_LEN,
    "corpus.max_len": DEFAULT_MAX_LEN,
    "corpus.pool_per_label": DEFAULT_POOL_PER_LABEL,
    "corpus.label_noise": 0.0,
    "data.train_size": DEFAULT_TRAIN_SIZE,
    "data.test_size": DEFAULT_TEST_SIZE,
    "data.marc_path": None,
    "data.marc_test_path": None,
    "data.hash_buckets": DEFAULT_HASH_BUCKETS,
    "data.translation_memory": None,
    "sequence.hops": DEFAULT_HOPS,
    "sequence.file": None,
    "sequence.seed": None,
    "sequence.id": DEFAULT_SEQUENCE_ID,
    "method": METHOD_SEQFT_TRANS_LLRD,
    "train.epochs": DEFAULT_EPOCHS,
    "train.base_lr": DEFAULT_BASE_LR,
    "train.zeta": DEFAULT_ZETA,
    "train.batch_size": DEFAULT_BATCH_SIZE,
    "train.validation_fraction": DEFAULT_VALIDATION_FRACTION,
    "train.optimizer": OPTIMIZER_ADAMW,
    "train.weight_decay": DEFAULT_WEIGHT_DECAY,
    "augment.fraction": DEFAULT_AUGMENT_FRACTION,
    "augment.stratified": False,
    "metrics.strict_ol_od": False,
    "eval.workers": DEFAULT_EVAL_WORKERS,
    "eval.collapse_threshold": DEFAULT_COLLAPSE_THRESHOLD,
    "model.embed_dim": DEFAULT_EMBED_DIM,
    "model.num_blocks": DEFAULT_NUM_BLOCKS,
    "model.num_heads": DEFAULT_NUM_HEADS,
    "model.ffn_dim": DEFAULT_FFN_DIM,
    "model.max_seq_len": DEFAULT_MAX_SEQ_LEN,
    "model.alignment": DEFAULT_ALIGNMENT,
    "seed": 0,
}

# Keys whose None default is a path rather than an integer.
PATH_KEYS = ("data.marc_path", "data.marc_test_path", "data.translation_memory", "sequence.file")

# ==== RUN DIRECTORY LAYOUT ====
CONFIG_SNAPSHOT_FILE = "config.txt"
SEQUENCE_FILE = "sequence.txt"
HOP_DIR_FORMAT = "hop_{:03d}"
CHECKPOINT_FILE = "checkpoint.npz"
HOP_RESULTS_FILE = "results.csv"
HOP_RECORD_FILE = "record.json"
METRICS_FILE = "metrics.csv"
SUMMARY_JSON_FILE = "summary.json"
SUMMARY_TEXT_FILE = "summary.txt"
FORGETTING_FILE = "forgetting.csv"
RESUME_MARKER_FILE = "RESUME"
RUN_LOG_FILE = "run_log.md"
PLOT_FILE = "hopwise_f1.svg"

METRICS_COLUMNS = ["hop", "train_lang", "train_category", "test_lang", "test_category", "f1"]

# ==== SUITE LAYOUT ====
SUITE_SEQUENCES_DIR = "sequences"
SUITE_RUNS_DIR = "runs"
SUITE_COMPARISON_CSV = "comparison.csv"
SUITE_COMPARISON_TEXT = "comparison.txt"
SUITE_ZETA_SWEEP_CSV = "zeta_sweep.csv"
SUITE_ZETA_SWEEP_TEXT = "zeta_sweep.txt"
SUITE_FAILURES_FILE = "failures.json"

# ==== PLOTS ====
PLOT_WIDTH = 1200
PLOT_HEIGHT = 400
PLOT_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
               "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
PLOT_OVERLAY_OPACITY = 0.35

# ==== LOGGING ====
DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_RUNS_DIR = "runs"
LOG_FORMAT = "%(asctime)s | %(levelname)s | %(message)s"
LOG_DATE_FORMAT = "%H:%M:%S"
DISPLAY_TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S"

# ==== ENVIRONMENT VARIABLES ====
ENV_LOG_LEVEL = "SEQFT_LOG_LEVEL"
ENV_RUNS_DIR = "SEQFT_RUNS_DIR"
ENV_EVAL_WORKERS = "SEQFT_EVAL_WORKERS"

# ==== MESSAGES ====
ERROR_OUT_DIR_NOT_EMPTY = "Output directory {path} is not empty (use --force to overwrite)"
ERROR_PARENT_MISSING = "Parent directory of {path} does not exist"
ERROR_EMPTY_RUN_DIR = "Run directory {path} has no completed hops"
ERROR_RUN_EXISTS = "Run directory {path} already holds results (use --resume or --force)"
