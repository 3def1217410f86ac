import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "curvlab",
    deadline=None,
    max_examples=int(os.environ.get("CURVLAB_HYPOTHESIS_EXAMPLES", "40")),
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("curvlab")
