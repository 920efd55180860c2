"""Domain errors. Every error carries a stable ``code`` string that the CLI
emits in its machine-readable error output."""


class FaultRankError(Exception):
    code = "Error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class DuplicateId(FaultRankError):
    code = "DuplicateId"


class DanglingComponentRef(FaultRankError):
    code = "DanglingComponentRef"


class EmptyCatalog(FaultRankError):
    code = "EmptyCatalog"


class UnknownFault(FaultRankError):
    code = "UnknownFault"


class UnknownComponent(FaultRankError):
    code = "UnknownComponent"


class MissingProbability(FaultRankError):
    code = "MissingProbability"


class DanglingEdge(FaultRankError):
    code = "DanglingEdge"


class UnknownTrigger(FaultRankError):
    code = "UnknownTrigger"


class UnknownNode(FaultRankError):
    code = "UnknownNode"


class EmptyGraph(FaultRankError):
    code = "EmptyGraph"


class SingularSystem(FaultRankError):
    code = "SingularSystem"


class GenerationFailed(FaultRankError):
    code = "GenerationFailed"


class InvalidInput(FaultRankError):
    code = "InvalidInput"
