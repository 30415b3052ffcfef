from dataclasses import dataclass


@dataclass(frozen=True)
class Settings:
    """Caps and solver limits threaded through the heavier computations."""

    lp_max_iters: int = 10_000
    enum_cap: int = 1_000_000
    prokhorov_cap: int = 16
    vc_cap: int = 20

    def __post_init__(self):
        for name in ("lp_max_iters", "enum_cap", "prokhorov_cap", "vc_cap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


DEFAULT_SETTINGS = Settings()
