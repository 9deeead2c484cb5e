"""Shared fixtures: one demo store per session plus a service client over it."""

from __future__ import annotations

import os

import pytest
from fastapi.testclient import TestClient

from rise.fixtures import build_demo_store
from rise.service import create_app


@pytest.fixture(scope="session", autouse=True)
def _no_ambient_ui(tmp_path_factory):
    # keep results identical whether or not a web client build exists in cwd
    os.environ["RISE_UI_DIR"] = str(tmp_path_factory.mktemp("no-ui") / "absent")


@pytest.fixture(scope="session")
def demo_store(tmp_path_factory):
    root = tmp_path_factory.mktemp("demo-store")
    return build_demo_store(root)


@pytest.fixture(scope="session")
def demo_client(demo_store):
    with TestClient(create_app(demo_store.root)) as client:
        yield client
