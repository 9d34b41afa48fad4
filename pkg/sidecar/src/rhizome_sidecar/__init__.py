__version__ = "0.1.0"

from .models import echo_embed, reduce_points, cluster_labels  # noqa: E402,F401
