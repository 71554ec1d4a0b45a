"""Hard-edge kernels, Fredholm determinants and large-gap asymptotics for
products of random matrices and Muttalib-Borodin ensembles."""
from .errors import *  # noqa: F401,F403
from .models import CConstants, ModelParams, ScalingInfo, c_constants, log_F, scaling_info
from .kernels import KernelEvaluator, bessel_kernel, kernel_eval
from .fredholm import DetCurve, DetResult, det_curve, det_hs_arb, det_hs_contour, det_nystrom
from .asymptotics import AsymptoticData, asymptotic_data, thm12_coeffs

__version__ = "0.1.0"
