from typing import Optional


class BiasKitError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code = 2


class InputError(BiasKitError):
    """Malformed or unusable input. The CLI exits with status 1."""

    exit_code = 1

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# conll_io

class UnbalancedCorefBrackets(InputError):
    def __init__(self, doc_id: str, part: int, sentence: int, detail: str = "", line: Optional[int] = None):
        self.doc_id = doc_id
        self.part = part
        self.sentence = sentence
        message = f"unbalanced coreference brackets in ({doc_id}) part {part}, sentence {sentence}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message, line)


class InconsistentColumnCount(InputError):
    pass


class MalformedHeader(InputError):
    pass


class DuplicatePart(InputError):
    pass


class UndecodableInput(InputError):
    pass


# gender_swap

class MissingNEColumn(InputError):
    pass


class AmbiguousRule(InputError):
    def __init__(self, source: str, pos: Optional[str]):
        self.source = source
        self.pos = pos
        super().__init__(f"more than one rule for source {source!r} with POS constraint {pos or '-'}")


class InvalidRule(InputError):
    pass


class DuplicateRule(InputError):
    pass


# rule_mining

class EmptyInput(InputError):
    pass


# winogen

class DuplicateOccupation(InputError):
    pass


class PercentOutOfRange(InputError):
    pass


class Exactly50Percent(InputError):
    pass


class InsufficientOccupations(InputError):
    pass


class OddTwinCount(InputError):
    pass


# metrics

class MisalignedUnits(InputError):
    pass


class MentionNotFound(InputError):
    pass


# resources

class EmptyGazetteer(InputError):
    pass


class DuplicatePhrase(InputError):
    pass
