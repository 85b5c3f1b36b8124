"""
PDF Generator for fit reports
Renders a fit result and the fitted curve data as tables (no plots)
"""

import math
from io import BytesIO

from reportlab.lib import colors
from reportlab.lib.enums import TA_CENTER
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from export_utils import COLUMN_UNITS

INK = colors.HexColor('#1f2d3d')
HEADER_FILL = colors.HexColor('#3b5068')
STRIPE = colors.HexColor('#eef2f6')


def _fmt(value, digits):
    if math.isinf(value) or math.isnan(value):
        return str(value)
    return f"{value:.{digits}g}"


class PDFGenerator:
    """Base PDF generator with common functionality"""

    def __init__(self):
        self.pagesize = A4
        self.styles = getSampleStyleSheet()
        self.setup_custom_styles()

    def setup_custom_styles(self):
        """Report title, section and body styles"""
        self.styles.add(ParagraphStyle(
            name='ReportTitle',
            parent=self.styles['Title'],
            fontSize=18,
            textColor=INK,
            spaceAfter=12,
            alignment=TA_CENTER,
        ))
        self.styles.add(ParagraphStyle(
            name='Section',
            parent=self.styles['Heading3'],
            textColor=HEADER_FILL,
            spaceBefore=12,
            spaceAfter=6,
        ))
        self.styles.add(ParagraphStyle(
            name='Body',
            parent=self.styles['BodyText'],
            fontSize=9,
            leading=12,
            textColor=INK,
        ))

    def create_header(self, title, subtitle):
        return [
            Paragraph(title, self.styles['ReportTitle']),
            Paragraph(subtitle, self.styles['Body']),
            Spacer(1, 0.15 * inch),
        ]

    def info_table(self, rows):
        """Two-column label/value block without grid lines"""
        table = Table(rows, colWidths=[1.6 * inch, 4.4 * inch], hAlign='LEFT')
        table.setStyle(TableStyle([
            ('FONTNAME', (0, 0), (0, -1), 'Helvetica-Bold'),
            ('FONTSIZE', (0, 0), (-1, -1), 9),
            ('TEXTCOLOR', (0, 0), (-1, -1), INK),
            ('VALIGN', (0, 0), (-1, -1), 'TOP'),
            ('LEFTPADDING', (0, 0), (-1, -1), 0),
        ]))
        return table

    def grid_table(self, rows, col_widths):
        """Numeric table: monospaced values, striped rows, header repeated on page breaks"""
        table = Table(rows, colWidths=col_widths, repeatRows=1, hAlign='LEFT')
        table.setStyle(TableStyle([
            ('BACKGROUND', (0, 0), (-1, 0), HEADER_FILL),
            ('TEXTCOLOR', (0, 0), (-1, 0), colors.white),
            ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
            ('FONTNAME', (0, 1), (-1, -1), 'Courier'),
            ('FONTSIZE', (0, 0), (-1, -1), 8),
            ('ALIGN', (1, 1), (-1, -1), 'RIGHT'),
            ('ROWBACKGROUNDS', (0, 1), (-1, -1), [colors.white, STRIPE]),
            ('LINEBELOW', (0, 0), (-1, 0), 0.75, INK),
            ('LINEBELOW', (0, -1), (-1, -1), 0.75, INK),
        ]))
        return table


class FitReportPDF(PDFGenerator):
    """Generate fit report PDFs"""

    def generate(self, fit, curve=None, source=None):
        """
        Build a report for a FitResult and, optionally, the curve it was fitted to

        Args:
            fit: FitResult
            curve: Optional ScanCurve whose points are listed
            source: Optional curve file name shown in the header

        Returns:
            BytesIO: The PDF document
        """
        buffer = BytesIO()
        # invariant=True keeps repeated reports byte-identical
        doc = SimpleDocTemplate(buffer, pagesize=self.pagesize, invariant=True,
                                title=f"{fit.model} fit report")
        subtitle = f"Model: <b>{fit.model}</b>" + (f" &nbsp; Curve: {source}" if source else '')
        elements = self.create_header("Fit Report", subtitle)

        status = 'converged' if fit.converged else '<font color="#c0392b">NOT converged</font>'
        elements.append(Paragraph("Fit status", self.styles['Section']))
        elements.append(self.info_table([
            ['Status:', Paragraph(status, self.styles['Body'])],
            ['Evaluations:', str(fit.iterations)],
            ['Residual norm:', _fmt(fit.residual_norm, 6)],
            ['Message:', Paragraph(fit.message or '-', self.styles['Body'])],
        ]))

        elements.append(Paragraph("Parameters", self.styles['Section']))
        param_rows = [['Parameter', 'Value', 'Std. error']]
        for name, value in fit.params.items():
            param_rows.append([name, _fmt(value, 8), _fmt(fit.std_errors.get(name, math.nan), 3)])
        elements.append(self.grid_table(param_rows, [1.8 * inch, 2 * inch, 2 * inch]))

        if curve is not None:
            x_label = curve.metadata.get('x_label', 'x')
            y_label = curve.metadata.get('y_label', 'y')
            elements.append(Paragraph(f"Curve data ({curve.scan_type}, {len(curve)} points)",
                                      self.styles['Section']))
            data_rows = [['#', f"{x_label} [{COLUMN_UNITS.get(x_label, '1')}]",
                          f"{y_label} [{COLUMN_UNITS.get(y_label, '1')}]"]]
            for idx, (x, y) in enumerate(zip(curve.x, curve.y), 1):
                data_rows.append([str(idx), _fmt(x, 6), _fmt(y, 6)])
            elements.append(self.grid_table(data_rows, [0.6 * inch, 2.4 * inch, 2.4 * inch]))

        doc.build(elements)
        buffer.seek(0)
        return buffer
