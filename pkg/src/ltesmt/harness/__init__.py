"""Command line and benchmark runner."""
from .bench import HEADER, BenchRecord, disagreements, run_bench, run_one, write_csv
from .corpus import corpus, write_corpus

__all__ = ["HEADER", "BenchRecord", "disagreements", "run_bench", "run_one", "write_csv", "corpus", "write_corpus"]
