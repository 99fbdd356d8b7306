"""Exception hierarchy shared by every layer."""


class DiscoveryError(Exception):
    """Base class for all recoverable errors raised by wsdiscovery."""


class OntologyError(DiscoveryError):
    """Malformed or inconsistent ontology document."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class UnknownConceptError(OntologyError, KeyError):
    def __init__(self, name):
        super().__init__(f"unknown concept {name!r}")
        self.name = name

    def __str__(self):
        return self.args[0]


class ValidationError(DiscoveryError):
    """An invariant violation located by a field path such as ``qos[1].value``."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class RegistryError(DiscoveryError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class QoSError(DiscoveryError):
    pass


class RatingError(DiscoveryError):
    pass


class ProtocolError(DiscoveryError):
    pass


class ConfigError(DiscoveryError):
    pass
