from experiments.constant_regime import ConstantRegime
from experiments.graphon_check import GraphonCheck
from experiments.histograms import Histograms
from experiments.local_vs_global import LocalVsGlobal
from experiments.low_degree import LowDegree
from experiments.manifold_figure import ManifoldFigure

EXPERIMENTS = {
    cls.name: cls
    for cls in (ManifoldFigure, LocalVsGlobal, LowDegree, ConstantRegime, Histograms, GraphonCheck)
}

__all__ = ["EXPERIMENTS"]
