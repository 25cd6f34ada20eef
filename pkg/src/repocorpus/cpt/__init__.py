from .corpus import build_cpt_corpus, mix_corpus
from .paths import enumerate_dfs_paths
from .tokenizer import ByteQuarterTokenizer, Tokenizer
from .windows import CptConfig, CptSample, PointerMode, Window, generate_windows, node_text, plan_windows

__all__ = [
    "ByteQuarterTokenizer",
    "CptConfig",
    "CptSample",
    "PointerMode",
    "Tokenizer",
    "Window",
    "build_cpt_corpus",
    "enumerate_dfs_paths",
    "generate_windows",
    "mix_corpus",
    "node_text",
    "plan_windows",
]
