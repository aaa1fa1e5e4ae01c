"""
CSV Exporter Module
Writes report tables (training log, stage diagnostics, metrics, backbone curves) to CSV,
validated against their pandera schema
"""
import os
import logging
from typing import Any, Dict, List, Optional, Union

import pandera.polars as pa
import polars as pl

from core.export.atomic import atomic_path

logger = logging.getLogger(__name__)

Rows = Union[pl.DataFrame, List[Dict[str, Any]]]


def polars_schema(schema: pa.DataFrameSchema) -> Dict[str, Any]:
    """Column name -> polars dtype, in schema order"""
    return {name: column.dtype.type for name, column in schema.columns.items()}


def to_frame(data: Rows, schema: Optional[pa.DataFrameSchema] = None) -> pl.DataFrame:
    """Build a frame from row dicts; with a schema, columns follow its order and dtypes"""
    if isinstance(data, pl.DataFrame):
        if schema is None:
            return data
        return data.select(list(schema.columns)).cast(polars_schema(schema))
    if schema is None:
        return pl.DataFrame(data, infer_schema_length=None)
    return pl.DataFrame([{name: row.get(name) for name in schema.columns} for row in data],
                        schema=polars_schema(schema), strict=False)


class CSVExporter:
    """Exports report tables to CSV"""

    def __init__(self, float_precision: Optional[int] = None):
        self.float_precision = float_precision

    def export(
        self,
        data: Rows,
        output_path: str,
        schema: Optional[pa.DataFrameSchema] = None,
        include_header: bool = True,
        null_value: str = ''
    ) -> Dict[str, Any]:
        """
        Export rows to CSV.

        Args:
            data: DataFrame or list of row dicts
            output_path: Output file path
            schema: pandera schema the table must satisfy before it is written
            include_header: Include column headers
            null_value: String to use for null values

        Returns:
            Export result
        """
        try:
            df = to_frame(data, schema)
            if schema is not None:
                df = schema.validate(df)

            with atomic_path(output_path) as tmp:
                df.write_csv(
                    tmp,
                    include_header=include_header,
                    null_value=null_value,
                    float_precision=self.float_precision
                )

            file_size = os.path.getsize(output_path)
            logger.info(f"Wrote {len(df)} rows to {output_path}")

            return {
                'success': True,
                'output_path': output_path,
                'schema': schema.name if schema is not None else None,
                'row_count': len(df),
                'column_count': len(df.columns),
                'file_size_bytes': file_size
            }

        except (pa.errors.SchemaError, pa.errors.SchemaErrors) as e:
            logger.error(f"Report {output_path} failed schema validation: {e}")
            return {'success': False, 'error': f"Schema validation failed: {e}"}
        except Exception as e:
            logger.error(f"Error exporting CSV: {e}", exc_info=True)
            return {'success': False, 'error': str(e)}

    def export_multiple(
        self,
        tables: Dict[str, Rows],
        output_dir: str,
        schemas: Optional[Dict[str, pa.DataFrameSchema]] = None
    ) -> Dict[str, Any]:
        """Export several named tables as <name>.csv in one directory"""
        schemas = schemas or {}
        results = []
        for name, data in tables.items():
            output_path = os.path.join(output_dir, f"{name}.csv")
            result = self.export(data, output_path, schema=schemas.get(name))
            results.append({
                'name': name,
                'path': output_path,
                'success': result['success'],
                'rows': result.get('row_count', 0)
            })

        return {
            'success': all(r['success'] for r in results),
            'output_dir': output_dir,
            'files_exported': results
        }


def read_report(path: str, schema: Optional[pa.DataFrameSchema] = None) -> pl.DataFrame:
    """Read a report back, restoring schema dtypes (null cells come back as null)"""
    df = pl.read_csv(path, schema_overrides=polars_schema(schema) if schema is not None else None)
    return schema.validate(df) if schema is not None else df
