"""Exception hierarchy shared by every module.

Each error carries a stable machine ``code`` (the class name) so the HTTP
layer can map exceptions to JSON error bodies without string matching.
"""

from __future__ import annotations


class VulnesisError(Exception):
    """Base class; ``code`` mirrors the concrete class name."""

    @property
    def code(self) -> str:
        return type(self).__name__


# --- workflow / project state ---------------------------------------------

class IllegalTransition(VulnesisError):
    def __init__(self, current: str, target: str):
        super().__init__(f"illegal state transition {current} -> {target}")
        self.current = current
        self.target = target


class WrongState(VulnesisError):
    pass


class StaleProject(VulnesisError):
    pass


# --- vulnerability / damage engine -----------------------------------------

class InvalidScale(VulnesisError):
    pass


class WrongArity(VulnesisError):
    pass


class OutOfRange(VulnesisError):
    pass


class BadBandConfig(VulnesisError):
    pass


class DuplicateAcceleration(VulnesisError):
    def __init__(self, ag: float):
        super().__init__(f"a scenario with acceleration {ag!r} already exists")
        self.ag = ag


class UnknownScenario(VulnesisError):
    pass


# --- ingestion --------------------------------------------------------------

class MissingColumn(VulnesisError):
    pass


class UnreconciledTypes(VulnesisError):
    pass


class DuplicateCode(VulnesisError):
    pass


class UnknownCode(VulnesisError):
    pass


class UnknownBuilding(VulnesisError):
    pass


class IncompleteSurvey(VulnesisError):
    pass


class NotAFeatureCollection(VulnesisError):
    pass


class MissingKeyProperty(VulnesisError):
    def __init__(self, feature_index: int):
        super().__init__(f"feature {feature_index} lacks the key property")
        self.feature_index = feature_index


# --- typologies / sampling ---------------------------------------------------

class DuplicateName(VulnesisError):
    pass


class UnknownMaster(VulnesisError):
    pass


class UnknownTypology(VulnesisError):
    pass


class KeyAlreadyAssigned(VulnesisError):
    def __init__(self, key: str, holder: str):
        super().__init__(f"subtypology {key} already belongs to typology {holder}")
        self.key = key
        self.holder = holder


class KeyNotMember(VulnesisError):
    pass


class QuotaExceedsPopulation(VulnesisError):
    def __init__(self, typology_id: str, quota: int, population: int):
        super().__init__(
            f"typology {typology_id}: quota {quota} exceeds population {population}"
        )
        self.typology_id = typology_id
        self.quota = quota
        self.population = population


class UnassignedBuildingsRemain(VulnesisError):
    pass


class NothingSurveyed(VulnesisError):
    pass


class BadSampleSpec(VulnesisError):
    pass


# --- geometry / aggregation ---------------------------------------------------

class DegenerateRing(VulnesisError):
    pass


class NoBlocksLayer(VulnesisError):
    pass


class MissingLayer(VulnesisError):
    def __init__(self, granularity: str):
        super().__init__(f"no geometry available for granularity {granularity}")
        self.granularity = granularity


class UnknownLevel(VulnesisError):
    pass


# --- persistence ---------------------------------------------------------------

class SchemaTooNew(VulnesisError):
    def __init__(self, version: int, supported: int):
        super().__init__(f"schema version {version} is newer than supported {supported}")
        self.version = version
        self.supported = supported


class CorruptFile(VulnesisError):
    def __init__(self, name: str, position: str, detail: str = ""):
        msg = f"corrupt file {name} at {position}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.name = name
        self.position = position


class UnknownKind(VulnesisError):
    pass


class LockHeld(VulnesisError):
    pass


class IoFailure(VulnesisError):
    pass


class UnknownProject(VulnesisError):
    pass


# --- request validation (service layer) ---------------------------------------

class InvalidRequest(VulnesisError):
    pass
