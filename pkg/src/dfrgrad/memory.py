"""Stored-value accounting for full versus truncated backpropagation."""

from dataclasses import dataclass

# (series length T, classes N_y) per benchmark, with N_x = 30. Recovered by
# inverting the reference storage totals through memory_counts.
BENCHMARK_SHAPES = {
    "ARAB": (93, 10),
    "AUS": (136, 95),
    "CHAR": (205, 20),
    "CMU": (580, 2),
    "ECG": (152, 2),
    "JPVOW": (29, 9),
    "KICK": (841, 2),
    "LIB": (45, 15),
    "NET": (994, 13),
    "UWAV": (315, 8),
    "WAF": (198, 2),
    "WALK": (1918, 2),
}


@dataclass(frozen=True)
class MemoryReport:
    T: int
    n_nodes: int
    n_classes: int
    naive: int
    simplified: int

    @property
    def reduction(self) -> float:
        return (self.naive - self.simplified) / self.naive

    def to_dict(self):
        return {
            "T": self.T,
            "n_nodes": self.n_nodes,
            "n_classes": self.n_classes,
            "naive": self.naive,
            "simplified": self.simplified,
            "reduction": self.reduction,
        }


def memory_counts(T: int, n_nodes: int, n_classes: int) -> MemoryReport:
    """Stored values for reservoir states, DPRR and readout weights.

    The naive count keeps T state vectors, the truncated one keeps two; both
    store the N_r DPRR values and the N_y * (N_r + 1) readout weights.
    For T = 1 the truncated count is the larger one and the reduction is
    negative.
    """
    if min(T, n_nodes, n_classes) < 1:
        raise ValueError("T, n_nodes and n_classes must be >= 1")
    n_r = n_nodes * (n_nodes + 1)
    shared = n_r + n_classes * (n_r + 1)
    return MemoryReport(T, n_nodes, n_classes, T * n_nodes + shared, 2 * n_nodes + shared)


def benchmark_table(n_nodes: int = 30):
    return {name: memory_counts(T, n_nodes, ny) for name, (T, ny) in BENCHMARK_SHAPES.items()}
