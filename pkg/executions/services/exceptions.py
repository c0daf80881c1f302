"""
Errors raised while unrolling, exploring or enumerating a litmus test.
"""


class SimulationError(Exception):
    """Base class for every execution-engine failure."""


class RecursionUnsupported(SimulationError):
    def __init__(self, thread, op):
        self.thread = thread
        self.op = op
        super().__init__(f'P{thread} contains a call ({op}); calls and recursion are not simulated')


class ExpressionOverflow(SimulationError):
    """Arithmetic produced a value outside its declared width."""


class UnresolvableAddress(SimulationError):
    def __init__(self, description):
        self.description = description
        super().__init__(f'cannot resolve address {description}')


class IncompatibleModel(SimulationError):
    def __init__(self, model, dialect):
        self.model = model
        self.dialect = dialect
        super().__init__(f'model {model!r} does not apply to {dialect} tests')


class CandidateExplosion(SimulationError):
    def __init__(self, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(f'candidate budget exceeded: {count} examined, cap is {cap}')


class SimulationTimeout(SimulationError):
    def __init__(self, budget, elapsed):
        self.budget = budget
        self.elapsed = elapsed
        super().__init__(f'simulation exceeded {budget}s (stopped after {elapsed:.2f}s)')
