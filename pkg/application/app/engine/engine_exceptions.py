class DimensionMismatchException(Exception):
    """
    Exception raised when an operation receives shape-incompatible operands.
    """
    exit_code = 5

    def __init__(self, operation: str, left_shape: tuple, right_shape: tuple):
        self.operation = operation
        self.left_shape = tuple(left_shape)
        self.right_shape = tuple(right_shape)
        super().__init__(f"{operation}: incompatible shapes {self.left_shape} and {self.right_shape}")


class ContractException(Exception):
    """
    Exception raised when an operation is called outside its contract
    (non-scalar loss, sequence without targets, empty metric input, ...).
    """
    exit_code = 5

    def __init__(self, message: str):
        super().__init__(message)


class TrainingDivergenceException(Exception):
    """
    Exception raised when training produces a non-finite loss or gradient.
    `where` names the parameter, or the epoch and batch, at which it happened.
    """
    exit_code = 4

    def __init__(self, where: str, value: float | None = None):
        self.where = where
        self.value = value
        detail = f" (value {value})" if value is not None else ""
        super().__init__(f"Training diverged at {where}{detail}")
