"""Unit tests for metrics recording."""

import pytest
from unittest.mock import Mock, patch

from crn_dot import metrics
from crn_dot.config import CrnConfig


@pytest.fixture
def mock_meter():
    """Create a mock meter with counter/histogram creation."""
    meter = Mock()
    counter = Mock()
    histogram = Mock()
    meter.create_counter.return_value = counter
    meter.create_histogram.return_value = histogram
    return meter, counter, histogram


class TestSolveMetrics:
    """Tests for branch-and-bound metrics."""

    def test_record_milp_solve(self):
        """Should add to every solve instrument with the status label."""
        solves, nodes, pivots, duration = Mock(), Mock(), Mock(), Mock()

        with patch.object(metrics, '_meter', Mock()):
            with patch.object(metrics, '_solves_counter', solves), \
                    patch.object(metrics, '_nodes_counter', nodes), \
                    patch.object(metrics, '_lp_iterations_counter', pivots), \
                    patch.object(metrics, '_solve_duration_histogram', duration):
                metrics.record_milp_solve("optimal", nodes=12, lp_iterations=340, duration_ms=25.0)

        solves.add.assert_called_once_with(1, {"status": "optimal"})
        nodes.add.assert_called_once_with(12, {"status": "optimal"})
        pivots.add.assert_called_once_with(340, {"status": "optimal"})
        duration.record.assert_called_once_with(25.0, {"status": "optimal"})

    def test_instruments_created_lazily(self, mock_meter):
        """Instruments are created from the meter on first use."""
        meter, counter, histogram = mock_meter

        with patch.object(metrics, '_meter', meter):
            metrics.record_milp_solve("limit", 1, 2, 3.0)

        names = [c.kwargs["name"] for c in meter.create_counter.call_args_list]
        assert "crn.milp.solves_total" in names
        assert "crn.realization.resamples_total" in names
        meter.create_histogram.assert_called_once()
        histogram.record.assert_called_once_with(3.0, {"status": "limit"})

    def test_handles_missing_meter(self):
        """Should not fail when meter is not configured."""
        with patch.object(metrics, '_meter', None):
            metrics.record_milp_solve("optimal", 1, 1, 1.0)  # Should not raise


class TestSearchMetrics:
    """Tests for resample and command counters."""

    def test_record_resample(self, mock_meter):
        """Resamples are labelled with the seed that failed."""
        meter, counter, _ = mock_meter

        with patch.object(metrics, '_meter', meter):
            with patch.object(metrics, '_resamples_counter', counter):
                metrics.record_resample(4)
                counter.add.assert_called_once_with(1, {"seed": 4})

    def test_record_command(self, mock_meter):
        """Commands carry name and exit code."""
        meter, counter, _ = mock_meter

        with patch.object(metrics, '_meter', meter):
            with patch.object(metrics, '_commands_counter', counter):
                metrics.record_command("find", 2)
                counter.add.assert_called_once_with(1, {"command": "find", "exit_code": 2})

    def test_record_command_handles_missing_meter(self):
        """Should not fail when meter is not configured."""
        metrics.record_command("analyze")
        metrics.record_resample(0)


class TestConfigureMetrics:
    """Tests for configure_metrics."""

    def test_disabled_returns_none(self):
        """No provider when the exporter is none."""
        assert metrics.configure_metrics(CrnConfig()) is None
        assert metrics.get_meter() is None

    def test_console_exporter(self):
        """The console exporter yields a provider and a meter."""
        provider = metrics.configure_metrics(CrnConfig(metrics_exporter="console"))
        assert provider is not None
        assert metrics.get_meter() is not None
        assert metrics.configure_metrics(CrnConfig(metrics_exporter="console")) is provider

    def test_shutdown_clears_state(self):
        """shutdown_metrics drops provider and instruments."""
        metrics.configure_metrics(CrnConfig(metrics_exporter="console"))
        metrics.record_command("analyze")
        metrics.shutdown_metrics()
        assert metrics.get_meter() is None
        assert metrics._commands_counter is None
