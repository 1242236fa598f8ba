class ConfigurationException(Exception):
    """
    Exception raised when a configuration value, flag or hyperparameter combination is invalid.
    """
    exit_code = 2

    def __init__(self, message: str):
        super().__init__(message)


class UnknownConfigKeyException(ConfigurationException):
    """
    Exception raised when a config file contains a key that the consumer does not understand.
    """
    def __init__(self, path: str, key: str, valid_keys):
        self.path = path
        self.key = key
        super().__init__(f"Unknown key '{key}' in config '{path}'. Valid keys: {', '.join(sorted(valid_keys))}")
