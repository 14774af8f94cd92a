"""OpenAPI description generated from the gateway route table."""

import re

ERROR_SCHEMA = {
    "type": "object",
    "required": ["code", "message"],
    "properties": {
        "code": {"type": "string"},
        "message": {"type": "string"},
        "field_path": {"type": "string"},
    },
}

# Routes that return 201 on success; everything else answers 200.
CREATED_HANDLERS = {
    "handle_issue_token",
    "handle_create_record",
    "handle_register_service",
    "handle_add_source",
}


def _path_parameters(template: str) -> list:
    return [
        {
            "name": name,
            "in": "path",
            "required": True,
            "schema": {"type": "string"},
        }
        for name in re.findall(r"\{(\w+)\}", template)
    ]


def _responses(route) -> dict:
    ok = "201" if route.handler in CREATED_HANDLERS else "200"
    responses = {
        ok: {"description": "Success"},
        "422": {
            "description": "Invalid input",
            "content": {"application/json": {"schema": ERROR_SCHEMA}},
        },
    }
    if route.roles is not None:
        responses["401"] = {
            "description": "Missing or invalid bearer token",
            "content": {"application/json": {"schema": ERROR_SCHEMA}},
        }
        responses["403"] = {
            "description": f"Requires role {' or '.join(route.roles)}",
            "content": {"application/json": {"schema": ERROR_SCHEMA}},
        }
    return responses


def openapi_document(gateway) -> dict:
    """Describe every route the gateway will actually serve."""
    from .gateway import ROUTES

    paths: dict = {}
    for route in ROUTES:
        if route.requires_samples and not gateway.config.with_samples:
            continue
        if route.handler == "handle_issue_token" and not gateway.config.dev_token_issuer:
            continue
        operation = {
            "summary": route.summary,
            "responses": _responses(route),
        }
        params = _path_parameters(route.template)
        if params:
            operation["parameters"] = params
        if route.roles is not None:
            operation["security"] = [{"bearerAuth": []}]
            operation["description"] = f"Requires role: {' or '.join(route.roles)}."
        paths.setdefault(route.template, {})[route.method.lower()] = operation

    return {
        "openapi": "3.0.3",
        "info": {
            "title": "Language grid gateway",
            "version": "1.0.0",
            "description": (
                "Catalogue search and curation, service registration and "
                "execution, harvesting and usage metering over JSON."
            ),
        },
        "paths": dict(sorted(paths.items())),
        "components": {
            "securitySchemes": {
                "bearerAuth": {"type": "http", "scheme": "bearer", "bearerFormat": "JWT"}
            },
            "schemas": {"Error": ERROR_SCHEMA},
        },
    }
