"""Domain errors shared by all layers.

Every error carries a stable machine-readable ``code`` (the class name) plus
an ``http_status`` so the REST layer and the CLI can surface failures
programmatically without string matching.
"""

from __future__ import annotations

from typing import Any


class XannotError(Exception):
    """Base class for all annotation-system errors."""

    http_status = 400

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict[str, Any]:
        return {"code": self.code, "message": self.message, "details": self.details}


# --- resource creation -------------------------------------------------------

class EmptyBody(XannotError):
    http_status = 422


class EmptyLocator(XannotError):
    http_status = 422


class InvalidKind(XannotError):
    http_status = 422


# --- selector creation -------------------------------------------------------

class UnknownResource(XannotError):
    http_status = 404


class IncompatibleSelectorKind(XannotError):
    http_status = 422


class InvalidPayload(XannotError):
    http_status = 422


# --- link creation / deletion ------------------------------------------------

class DanglingEndpoint(XannotError):
    http_status = 422


class EmptySources(XannotError):
    http_status = 422


class EmptyTargets(XannotError):
    http_status = 422


class SelfReference(XannotError):
    http_status = 422


class UnknownLink(XannotError):
    http_status = 404


class UnknownEntity(XannotError):
    http_status = 404


class NotADocument(XannotError):
    http_status = 422


# --- anchoring ----------------------------------------------------------------

class PageMismatch(XannotError):
    http_status = 422


# --- presentation --------------------------------------------------------------

class DuplicateSelectorId(XannotError):
    http_status = 422


class WidgetTooWide(XannotError):
    http_status = 422


class UnknownAnchor(XannotError):
    http_status = 422


# --- store ----------------------------------------------------------------------

class IntegrityViolation(XannotError):
    http_status = 409

    def __init__(self, message: str, report: Any = None, **details: Any):
        super().__init__(message, **details)
        self.report = report

    def to_dict(self) -> dict[str, Any]:
        data = super().to_dict()
        if self.report is not None:
            data["details"]["report"] = self.report.to_dict()
        return data


class IoFailure(XannotError):
    http_status = 500


class MalformedDocument(XannotError):
    http_status = 400


class VersionUnsupported(XannotError):
    http_status = 400


# --- service ----------------------------------------------------------------------

class BindFailure(XannotError):
    http_status = 500


class StoreLocked(XannotError):
    http_status = 409
