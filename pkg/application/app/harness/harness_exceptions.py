class FoldFailedException(Exception):
    """
    Exception raised when training or scoring fails inside one cross-validation fold.
    Carries the exit code of the original error so the CLI reports the right category.
    """
    def __init__(self, fold: int, model: str, reason: str, exit_code: int = 5):
        self.fold = fold
        self.model = model
        self.reason = reason
        self.exit_code = exit_code
        super().__init__(f"Fold {fold} of '{model}' failed: {reason}")

    def __reduce__(self):
        return FoldFailedException, (self.fold, self.model, self.reason, self.exit_code)

    @staticmethod
    def wrap(fold: int, model: str, inner: Exception) -> "FoldFailedException":
        return FoldFailedException(fold, model, f"{type(inner).__name__}: {inner}", getattr(inner, "exit_code", 5))


class SelfTestFailedException(Exception):
    """
    Exception raised when one or more built-in checks fail.
    """
    exit_code = 5

    def __init__(self, failed: list[str]):
        self.failed = failed
        super().__init__(f"{len(failed)} self-test checks failed: {', '.join(failed)}")

    def __reduce__(self):
        return SelfTestFailedException, (self.failed,)
