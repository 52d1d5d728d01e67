from dropreef.schemas.drop import DropReport, ThresholdHints
from dropreef.services.metrics_service import metrics_service
from dropreef.services.report_service import report_service

from tests.factories import star_graph


def sample_report():
    return DropReport(
        dropped=[0],
        dropped_count=1,
        train_count=5,
        removed_edge_count=4,
        train_edge_count=4,
        drop_node_ratio=0.2,
        drop_edge_ratio=1.0,
        th_wnh=1.0,
        th_deg=3,
    )


def test_pdf_is_written(tmp_path):
    hints = ThresholdHints(
        multi_label=False,
        num_classes=2,
        wnh_upper_bound=2 ** 0.5,
        average_degree=1.6,
        train_count=5,
        degree_quantiles={"q0.5": 1.0},
        wnh_quantiles={"q0.5": 1.41},
    )
    quantiles = metrics_service.degree_quantiles(star_graph(9), 0.5, 5)
    path = tmp_path / "report.pdf"

    buffer = report_service.render_pdf_report(sample_report(), hints, quantiles, path)
    assert path.read_bytes() == buffer.getvalue()
    assert path.read_bytes().startswith(b"%PDF")


def test_pdf_is_reproducible():
    first = report_service.render_pdf_report(sample_report()).getvalue()
    second = report_service.render_pdf_report(sample_report()).getvalue()
    assert first == second


def test_naive_mode_summary():
    report = sample_report().model_copy(update={"mode": "naive-top-degree 0.2", "th_wnh": None, "th_deg": None})
    assert report_service.render_pdf_report(report).getbuffer().nbytes > 0


def test_only_used_styles_are_registered():
    # the footer is drawn on the canvas, not through a paragraph style
    assert "CustomTitle" in report_service.styles
    assert "SectionHeading" in report_service.styles
    assert "Footer" not in report_service.styles
