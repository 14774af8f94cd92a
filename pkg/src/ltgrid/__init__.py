"""ltgrid: a desk-scale language-technology grid.

A metadata catalogue with faceted search, legacy-metadata harvesting, a
conformance-gated service registry and execution orchestrator with
scale-to-zero instance pools, deterministic built-in sample services for
every service class, and an authenticated HTTP gateway with usage metering.
"""

__version__ = "0.1.0"
