"""Run configuration: line-based key=value text with '#' comments.

The shipped defaults are the production parameter set: 3 scales of 8x8
patches with steps 4, 4, 7; 64x256 dictionaries; budgets s_z=10, s_v=8;
46000 training patches. Unknown keys are rejected so typos fail loudly.
"""

from dataclasses import dataclass, fields

from .dictlearn import LearnConfig
from .metrics import SsimParams
from .separation import SeparationConfig

__all__ = ["RunConfig", "parse_config", "load_config", "DEFAULT_CONFIG_TEXT"]


@dataclass
class RunConfig:
    scales: int = 3
    patch_sides: tuple = (8, 8, 8)
    steps: tuple = (4, 4, 7)
    s_z: int = 10
    s_v: int = 8
    common_atoms: int = 256
    innovation_atoms: int = 256
    iterations: int = 50
    objective_tol: float = 1e-4
    seed: int = 0
    lowpass_split: float = 0.5
    train_patches: int = 46000
    mca_s1: int = 10
    mca_s2: int = 10
    synth_size: int = 256
    ssim_window: int = 11
    ssim_sigma: float = 1.5
    ssim_k1: float = 0.01
    ssim_k2: float = 0.03

    def __post_init__(self):
        if self.scales < 1:
            raise ValueError("scales must be >= 1")
        if len(self.patch_sides) != self.scales or len(self.steps) != self.scales:
            raise ValueError("patch_sides and steps must list one value per scale")
        for p, e in zip(self.patch_sides, self.steps):
            if not 1 <= e <= p:
                raise ValueError(f"invalid step {e} for patch side {p}")
        if self.s_z < 0 or self.s_v < 0 or self.mca_s1 < 0 or self.mca_s2 < 0:
            raise ValueError("sparsity budgets must be >= 0")
        if not 0.0 <= self.lowpass_split <= 1.0:
            raise ValueError("lowpass_split must lie in [0, 1]")
        if self.train_patches < 1:
            raise ValueError("train_patches must be >= 1")
        # validated eagerly so bad ssim params fail at parse time
        self.ssim_params()

    @property
    def levels(self):
        return tuple(zip(self.patch_sides, self.steps))

    def separation_config(self):
        return SeparationConfig(
            levels=self.levels, s_z=self.s_z, s_v=self.s_v, lowpass_split=self.lowpass_split
        )

    def learn_config(self):
        return LearnConfig(
            s_z=self.s_z,
            s_v=self.s_v,
            iterations=self.iterations,
            objective_tol=self.objective_tol,
            seed=self.seed,
        )

    def ssim_params(self):
        return SsimParams(
            window_side=self.ssim_window,
            sigma=self.ssim_sigma,
            k1=self.ssim_k1,
            k2=self.ssim_k2,
        )


_INT_TUPLE_KEYS = {"patch_sides", "steps"}


def parse_config(text):
    """Parse key=value lines into a RunConfig; unknown keys are an error."""
    spec = {f.name: f.type for f in fields(RunConfig)}
    defaults = RunConfig()
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in spec:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if key in values:
            raise ValueError(f"config line {lineno}: duplicate key {key!r}")
        current = getattr(defaults, key)
        if key in _INT_TUPLE_KEYS:
            values[key] = tuple(int(tok) for tok in val.split(","))
        elif isinstance(current, int):
            values[key] = int(val)
        else:
            values[key] = float(val)
    return RunConfig(**values)


def load_config(path):
    if path is None:
        return RunConfig()
    with open(path, "r", encoding="ascii") as fh:
        return parse_config(fh.read())


DEFAULT_CONFIG_TEXT = """\
# default separation/training parameters
scales = 3
patch_sides = 8,8,8
steps = 4,4,7
s_z = 10
s_v = 8
common_atoms = 256
innovation_atoms = 256
iterations = 50
objective_tol = 1e-4
seed = 0
lowpass_split = 0.5
train_patches = 46000
"""
