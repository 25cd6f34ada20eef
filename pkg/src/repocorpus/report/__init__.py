from .plots import plot_graph_stats, plot_metrics, plot_run_report

__all__ = ["plot_graph_stats", "plot_metrics", "plot_run_report"]
