"""Portmanteau tests for nonlinear serial dependence in non-Gaussian
time series: the NLSD test, the GCov estimator and specification test,
bootstrap critical values, generator-basis construction, and a Monte
Carlo harness for size/power experiments."""

__version__ = "0.1.0"

from .series import (TimeSeries, Transform, TransformSet, apply_transforms,
                     default_transforms, detrend_polynomial)
from .distributions import (ErrorDistribution, NoncentralChiSquare,
                            chi2_cdf, chi2_quantile, derive_seed,
                            ks_normality_statistic, make_rng, marcum_q,
                            noncentral_chi2_cdf)
from .autocov import AutocovStack, portmanteau, r_squared_trace, sample_autocov
from .nlsd import TestReport, nlsd_test
from .models import (Dar1Spec, FitResult, MarSpec, MarTemplate, VarSpec,
                     VarTemplate, aml_fit, mar_components, noncausal_ar1,
                     ols_noncausal_ar1, rebuild, residuals, simulate,
                     simulate_mar)
from .gcov import (GcovFit, LocalAlternative, cugmm_extended_fit,
                   gcov_fit, gcov_objective, gcov_spec_test, jacobian_dGamma,
                   local_power, noncentrality, pi_projector,
                   plug_in_spec_test)
from .bootstrap import (BootstrapResult, bootstrap_local_power,
                        bootstrap_null, bootstrap_size_power_study,
                        bootstrap_test)
from .basis import (GeneratorGrid, OrthonormalBasis, build_generators,
                    diagonal_gcov_start, many_transform_statistic,
                    many_transform_test, orthonormalize,
                    power_exp_generators, standardized_statistic)

__all__ = [name for name in dir() if not name.startswith("_")]
