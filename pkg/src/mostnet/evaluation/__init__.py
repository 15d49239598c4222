"""Image quality metrics and directory reports."""
from .report import MetricReport, evaluate_dirs, evaluate_pairs
from .ssim import gaussian_window, mean_l1, ssim
