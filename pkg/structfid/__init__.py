import os

__version__ = "0.1.0"


class StructFidConfig:
    name = "structfid"
    verbose_name = "Structural Fidelity"
    description = (
        "Structural-fidelity evaluation of synthetic tabular data with CI scores and utility"
    )
    version = __version__
    default_settings = {
        "alpha": 0.01,
        "repeats": 10,
        "n_full": 100_000,
        "max_statements": 1_000_000,
        "ratio_guard": 1e-9,
        "ridge_jitter": 1e-8,
        "fisher_clamp": 1e-12,
        "cell_timeout": 120.0,
        "max_workers": 4,
        "trend_bins": 4,
        "smote_k": 5,
    }
    env_prefix = "STRUCTFID_"

    def __init__(self, **overrides):
        unknown = set(overrides) - set(self.default_settings)
        if unknown:
            raise KeyError(f"Unknown settings: {', '.join(sorted(unknown))}")
        self.settings = dict(self.default_settings)
        for key, default in self.default_settings.items():
            raw = os.environ.get(f"{self.env_prefix}{key.upper()}")
            if raw is not None:
                self.settings[key] = type(default)(raw)
        self.settings.update(overrides)

    def get(self, key: str):
        return self.settings[key]

    def __getattr__(self, key):
        try:
            return self.__dict__["settings"][key]
        except KeyError:
            raise AttributeError(key) from None


config = StructFidConfig()
