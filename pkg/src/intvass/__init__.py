"""Reachability, coverability and inclusion for integer VASS with resets.

Machines are compiled into existential (or Pi2) Presburger sentences whose
models are generalized Parikh images of accepting runs; an external SMT-LIB2
solver discharges them and sat models are turned back into validated witness
runs.  Bounded brute-force oracles and hardness-reduction generators provide
independent ground truth.
"""

from .backend import (
    FlowWitness,
    InclusionQuery,
    ReachQuery,
    SolverConfig,
    SolverSession,
    Verdict,
    decide,
    flows_to_run,
    invoke,
    parse_model,
    to_smtlib2,
)
from .machine_io import format_machine, parse_configuration, parse_machine, parse_machine_file
from .model import (
    Add,
    Affine,
    Configuration,
    Machine,
    MachineError,
    Reset,
    Run,
    Transition,
    apply,
    make_machine,
    normalize,
    run,
    step,
)
from .parikh import (
    GeneralizedParikhImage,
    MonitoredAlphabet,
    decompose,
    effect_matrix,
    gpi_effect,
    gpi_set,
    is_gpi,
)

__version__ = "0.1.0"
