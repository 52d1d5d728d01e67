"""
PDF Report Generation Service
Renders a one-document summary of a drop run
"""

from io import BytesIO
from pathlib import Path
from typing import Optional, Union

from reportlab.lib import colors
from reportlab.lib.enums import TA_CENTER
from reportlab.lib.pagesizes import letter
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.platypus import KeepTogether, Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from dropreef.core.config import settings
from dropreef.core.logging import logger, log_service_call
from dropreef.schemas.drop import DropReport, ThresholdHints
from dropreef.schemas.report import QuantileReport
from dropreef.utils.helpers import write_bytes_atomic

HEADER_COLOR = colors.HexColor("#283593")


class ReportService:
    """Service for rendering drop results as PDF"""

    def __init__(self):
        self.styles = getSampleStyleSheet()
        self._setup_custom_styles()

    def _setup_custom_styles(self):
        """Setup custom paragraph styles for the report"""

        self.styles.add(ParagraphStyle(
            name="CustomTitle",
            parent=self.styles["Heading1"],
            fontSize=22,
            textColor=colors.HexColor("#1a237e"),
            spaceAfter=24,
            alignment=TA_CENTER,
            fontName="Helvetica-Bold"
        ))

        self.styles.add(ParagraphStyle(
            name="SectionHeading",
            parent=self.styles["Heading2"],
            fontSize=15,
            textColor=HEADER_COLOR,
            spaceBefore=12,
            spaceAfter=10,
            fontName="Helvetica-Bold"
        ))

    # -------------------- HELPERS --------------------

    def _ratio_color(self, ratio: float):
        if ratio >= 0.5:
            return colors.HexColor("#c62828")
        elif ratio >= 0.1:
            return colors.HexColor("#f57c00")
        else:
            return colors.HexColor("#2e7d32")

    def _table(self, data, col_widths):
        table = Table(data, colWidths=col_widths)
        table.setStyle(TableStyle([
            ("BACKGROUND", (0, 0), (-1, 0), HEADER_COLOR),
            ("TEXTCOLOR", (0, 0), (-1, 0), colors.white),
            ("GRID", (0, 0), (-1, -1), 1, colors.grey),
            ("FONTNAME", (0, 0), (-1, 0), "Helvetica-Bold"),
            ("ALIGN", (1, 1), (-1, -1), "RIGHT"),
            ("BACKGROUND", (0, 1), (-1, -1), colors.whitesmoke),
        ]))
        return table

    def _create_footer(self, canvas, doc):
        canvas.saveState()
        canvas.setFont("Helvetica", 9)
        canvas.setFillColor(colors.grey)
        canvas.drawString(inch, 0.5 * inch, f"{settings.APP_NAME} {settings.APP_VERSION}")
        canvas.drawRightString(
            doc.width + doc.leftMargin,
            0.5 * inch,
            f"Page {canvas.getPageNumber()}"
        )
        canvas.restoreState()

    # -------------------- SECTIONS --------------------

    def _create_ratio_section(self, report: DropReport):
        data = [
            [
                Paragraph(
                    f'<font size="28" color="{self._ratio_color(report.drop_node_ratio).hexval()}">'
                    f'<b>{100 * report.drop_node_ratio:.2f}%</b></font>',
                    self.styles["Normal"],
                ),
                Paragraph(
                    f'<font size="28" color="{self._ratio_color(report.drop_edge_ratio).hexval()}">'
                    f'<b>{100 * report.drop_edge_ratio:.2f}%</b></font>',
                    self.styles["Normal"],
                ),
            ],
            [
                Paragraph("<b>Drop Node Ratio</b>", self.styles["Normal"]),
                Paragraph("<b>Drop Edge Ratio</b>", self.styles["Normal"]),
            ],
        ]
        table = Table(data, colWidths=[3 * inch, 3 * inch])
        table.setStyle(TableStyle([
            ("ALIGN", (0, 0), (-1, -1), "CENTER"),
            ("BOX", (0, 0), (-1, -1), 2, HEADER_COLOR),
            ("BACKGROUND", (0, 0), (-1, -1), colors.HexColor("#f5f5f5")),
            ("TOPPADDING", (0, 0), (-1, -1), 12),
            ("BOTTOMPADDING", (0, 0), (-1, -1), 12),
        ]))
        return KeepTogether([table])

    def _create_summary_table(self, report: DropReport):
        thresholds = (
            f"TH_WNH={report.th_wnh:g}, TH_DEG={report.th_deg}"
            if report.mode == "thresholds" else report.mode
        )
        data = [
            ["Quantity", "Value"],
            ["Training nodes", report.train_count],
            ["Dropped nodes", report.dropped_count],
            ["Edges at training nodes", report.train_edge_count],
            ["Removed edges", report.removed_edge_count],
            ["Selection", thresholds],
            ["Inference edges retained", "yes" if report.retain_inference_edges else "no"],
        ]
        return self._table(data, [3.5 * inch, 2.5 * inch])

    def _create_hints_section(self, hints: ThresholdHints):
        elements = [Paragraph("Threshold References", self.styles["SectionHeading"])]
        data = [["Reference", "Value"],
                ["WNH upper bound", f"{hints.wnh_upper_bound:.5f}"],
                ["Average degree", f"{hints.average_degree:.3f}"]]
        data += [[f"Training degree {k}", f"{v:g}"] for k, v in hints.degree_quantiles.items()]
        data += [[f"Training WNH {k}", f"{v:.5f}"] for k, v in hints.wnh_quantiles.items()]
        elements.append(self._table(data, [3.5 * inch, 2.5 * inch]))
        return KeepTogether(elements)

    def _create_quantile_section(self, quantiles: QuantileReport):
        elements = [Paragraph("Degree Concentration", self.styles["SectionHeading"])]
        data = [["Bucket", "Nodes", "Neighbor share", "Avg degree"]]
        for bucket in quantiles.buckets:
            data.append([
                bucket.label,
                bucket.node_count,
                f"{100 * bucket.neighbor_share:.2f}%",
                f"{bucket.average_degree:.2f}",
            ])
        data.append(["remainder", quantiles.num_nodes - quantiles.tracked_nodes,
                     f"{100 * quantiles.remainder_share:.2f}%", ""])
        elements.append(self._table(data, [1.8 * inch, 1.2 * inch, 1.6 * inch, 1.4 * inch]))
        return KeepTogether(elements)

    # -------------------- MAIN GENERATOR --------------------

    def render_pdf_report(
        self,
        report: DropReport,
        hints: Optional[ThresholdHints] = None,
        quantiles: Optional[QuantileReport] = None,
        path: Optional[Union[str, Path]] = None,
    ) -> BytesIO:
        """
        Build the PDF; also written atomically to `path` when given
        """
        log_service_call(
            "ReportService",
            "render_pdf_report",
            f"{report.dropped_count} dropped of {report.train_count}"
        )

        buffer = BytesIO()
        doc = SimpleDocTemplate(
            buffer,
            pagesize=letter,
            rightMargin=72,
            leftMargin=72,
            topMargin=72,
            bottomMargin=72,
            invariant=1,
        )

        story = [
            Paragraph("Redundancy Drop Report", self.styles["CustomTitle"]),
            self._create_ratio_section(report),
            Spacer(1, 0.3 * inch),
            self._create_summary_table(report),
            Spacer(1, 0.3 * inch),
        ]
        if hints is not None:
            story += [self._create_hints_section(hints), Spacer(1, 0.25 * inch)]
        if quantiles is not None:
            story.append(self._create_quantile_section(quantiles))

        doc.build(
            story,
            onFirstPage=self._create_footer,
            onLaterPages=self._create_footer
        )
        buffer.seek(0)

        if path is not None:
            write_bytes_atomic(path, buffer.getvalue())
        logger.info(f"PDF generated successfully ({buffer.getbuffer().nbytes} bytes)")
        return buffer


# Global instance
report_service = ReportService()

render_pdf_report = report_service.render_pdf_report
