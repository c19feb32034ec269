import logging
from collections import Counter
from enum import Enum
from dataclasses import dataclass, field
import uuid
from typing import Any, Dict, List, Optional
from datetime import datetime

class ErrorSeverity(Enum):
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"

class ErrorCode(Enum):

    FILE_NOT_FOUND = 1001
    IDX_BAD_MAGIC = 1002
    IDX_TRUNCATED = 1003
    IDX_COUNT_MISMATCH = 1004
    DOWNLOAD_FAILED = 1005

    DIMENSION_MISMATCH = 2001
    ARCHITECTURE_MISMATCH = 2002
    INVALID_TOP_K = 2003
    INVALID_DATASET = 2004
    CHECKSUM_MISMATCH = 2005

    DB_CONNECTION_ERROR = 3001
    DB_QUERY_ERROR = 3002

    TRAINING_DIVERGED = 4001
    PARTITION_RETRIES_EXCEEDED = 4002
    INVALID_CONFIGURATION = 4003

    UNKNOWN_ERROR = 9999


class FuseLabException(Exception):
    code = ErrorCode.UNKNOWN_ERROR

    def __init__(self, message: str, code: Optional[ErrorCode] = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        if code is not None:
            self.code = code
        self.details = details or {}


class ContractViolation(FuseLabException, ValueError):
    code = ErrorCode.DIMENSION_MISMATCH


class ArchitectureError(ContractViolation):
    code = ErrorCode.ARCHITECTURE_MISMATCH


class TrainingError(FuseLabException):
    code = ErrorCode.TRAINING_DIVERGED

    def __init__(self, message: str, epoch: int, step: int, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details={**(details or {}), "epoch": epoch, "step": step})
        self.epoch = epoch
        self.step = step


class IngestionError(FuseLabException):
    code = ErrorCode.FILE_NOT_FOUND


class IdxMagicError(IngestionError):
    code = ErrorCode.IDX_BAD_MAGIC


class IdxTruncatedError(IngestionError):
    code = ErrorCode.IDX_TRUNCATED


class IdxCountMismatchError(IngestionError):
    code = ErrorCode.IDX_COUNT_MISMATCH


class ConfigurationError(FuseLabException, ValueError):
    code = ErrorCode.INVALID_CONFIGURATION


class PartitionError(ConfigurationError):
    code = ErrorCode.PARTITION_RETRIES_EXCEEDED


_LOG_LEVELS = {
    ErrorSeverity.INFO: logging.INFO,
    ErrorSeverity.WARNING: logging.WARNING,
    ErrorSeverity.ERROR: logging.ERROR,
    ErrorSeverity.CRITICAL: logging.CRITICAL,
}


@dataclass
class FuseLabError:
    """One recorded failure of a run, trial or demo seed."""
    code: ErrorCode
    message: str
    severity: ErrorSeverity
    component: str
    record_id: Optional[str] = None
    source_file: Optional[str] = None
    details: Optional[Dict[str, Any]] = None
    timestamp: datetime = field(default_factory=datetime.now)
    id: str = field(default_factory=lambda: str(uuid.uuid4()))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error_code": self.code.value,
            "error_type": self.code.name,
            "message": self.message,
            "timestamp": self.timestamp.isoformat(),
            "severity": self.severity.value,
            "component": self.component,
            "source_file": self.source_file,
            "record_id": self.record_id,
            "details": self.details,
        }

    def describe(self) -> str:
        where = f" (Record: {self.record_id})" if self.record_id else ""
        return f"[{self.code.name}] {self.component}: {self.message}{where}"


class ErrorManager:
    """Collects run failures, logs them and mirrors them into the results store when one is attached."""

    def __init__(self, logger=None, db_manager=None):
        self.logger = logger or logging.getLogger('fuselab')
        self.db_manager = db_manager
        self.errors: List[FuseLabError] = []

    def add_error(self, error: FuseLabError) -> FuseLabError:
        self.errors.append(error)
        self.logger.log(_LOG_LEVELS[error.severity], error.describe())
        if self.db_manager is not None:
            try:
                self.db_manager.log_error(error)
            except Exception as e:
                self.logger.error(f"Could not persist {error.code.name} to the results store: {e}")
        return error

    def create_error(self, code: ErrorCode, message: str, severity: ErrorSeverity, component: str,
                     source_file: Optional[str] = None, record_id: Optional[str] = None,
                     details: Optional[Dict[str, Any]] = None) -> FuseLabError:
        return self.add_error(FuseLabError(code, message, severity, component, record_id=record_id,
                                           source_file=source_file, details=details))

    def record_exception(self, exc: Exception, component: str, severity: ErrorSeverity = ErrorSeverity.ERROR,
                         record_id: Optional[str] = None) -> FuseLabError:
        if isinstance(exc, FuseLabException):
            return self.create_error(exc.code, exc.message, severity, component,
                                     record_id=record_id, details=exc.details or None)
        return self.create_error(ErrorCode.UNKNOWN_ERROR, str(exc), severity, component,
                                 record_id=record_id, details={"exception": type(exc).__name__})

    def get_errors(self, severity: Optional[ErrorSeverity] = None, component: Optional[str] = None,
                   code: Optional[ErrorCode] = None) -> List[FuseLabError]:
        return [e for e in self.errors
                if (severity is None or e.severity == severity)
                and (component is None or e.component == component)
                and (code is None or e.code == code)]

    def has_critical_errors(self) -> bool:
        return any(e.severity == ErrorSeverity.CRITICAL for e in self.errors)

    def summary(self) -> Dict[str, Any]:
        by_severity = Counter(e.severity for e in self.errors)
        return {
            "total": len(self.errors),
            "by_severity": {s.value.lower(): by_severity[s] for s in ErrorSeverity},
            "by_component": dict(Counter(e.component for e in self.errors)),
        }
