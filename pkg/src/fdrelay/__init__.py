"""Wireless-powered full-duplex MIMO relay toolbox.

Beamformer design (optimum max-min and three closed-form schemes), optimal
time-split selection, exact and high-SNR outage probability, and a
deterministic Monte Carlo engine that cross-validates everything.
"""
from .beamforming import (BeamformerPair, Scheme, SchemeInfeasibleError,
                          SinrBreakdown, end_to_end_sinr, f1, f2,
                          mrc_mrt_pair, optimum_receive, rzf_pair, tzf_pair,
                          w_min_sinr)
from .channel import ChannelRealization, draw_channel, kappa, relay_power
from .config import SystemConfig, dbm_to_watts, default_config, watts_to_dbm
from .montecarlo import McEstimate, estimate_delay_throughput, estimate_outage, estimate_throughput
from .outage import (OutageCurve, OutageQuery, build_outage_curve,
                     delay_throughput, optimal_alpha_delay, outage_asymptotic,
                     outage_exact, outage_mrc_floor)
from .rng import RngStream
from .sdr import SdrProblem, SdrSolution, optimum_transmit, rank_one_recover, solve_feasibility, t_upper_bound
from .timesplit import (AlphaCoefficients, AlphaResult, JointMethod,
                        instantaneous_rate, joint_optimum, optimal_alpha_mrc,
                        optimal_alpha_optimum, optimal_alpha_rzf,
                        optimal_alpha_tzf, optimize_power_split)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
