"""Boolean fragment: encodings, transducers, equivalence and delay elimination."""

from .dfst import (Closure, Composition, Dfst, Equivalence, all_letters, brute_force_counterexample, closure,
                   compose_parallel, dfst_equivalent, dump_dfst, explore, restrict, run_dfst)
from .delay_elim import delay_eliminate, find_delay
from .encoding import (UNIT_SYMBOLS, VAL, beta_times, decode_alpha, decode_beta, encode_alpha, encode_beta)
from .machines import conformance, conformance_markdown, last_dfst, lift_dfst, nil_dfst, slift_geq_time_dfst, table_dfst, unit_dfst
from .translate import components, is_bool_fragment, to_dfst

__all__ = [
    "Closure", "Composition", "Dfst", "Equivalence", "all_letters", "brute_force_counterexample", "closure",
    "compose_parallel", "dfst_equivalent", "dump_dfst", "explore", "restrict", "run_dfst",
    "VAL", "beta_times", "decode_alpha", "decode_beta", "encode_alpha", "encode_beta", "UNIT_SYMBOLS",
    "delay_eliminate", "find_delay",
    "conformance", "conformance_markdown", "last_dfst", "lift_dfst", "nil_dfst", "slift_geq_time_dfst", "table_dfst", "unit_dfst",
    "components", "is_bool_fragment", "to_dfst",
]
